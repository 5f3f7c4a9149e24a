#include "sw4dvar/dd.hpp"

#include <cmath>
#include <stdexcept>

namespace sw4dvar {

namespace {

bool window_contains(const SpaceSubdomain& sub, int i, int nlon) {
  // i in [first, first+width) modulo nlon.
  const int rel = wrap_lon(i - sub.first(), nlon);
  return rel < sub.width();
}

// Overwrite the subdomain's longitude window of `global` with local values.
void embed_window(const StateVector& local, const SpaceSubdomain& sub, StateVector& global) {
  const int nlon = global.nlon, nlat = global.nlat, w = sub.width();
  for (int j = 0; j < nlat; ++j)
    for (int li = 0; li < w; ++li) {
      const int gi = wrap_lon(sub.first() + li, nlon);
      global.u(gi, j) = local.u(li, j);
      global.v(gi, j) = local.v(li, j);
      global.h(gi, j) = local.h(li, j);
    }
}

StateVector inject_zero(const StateVector& local, const SpaceSubdomain& sub, int nlon, int nlat) {
  StateVector g(nlon, nlat);
  embed_window(local, sub, g);
  return g;
}

// Everything one local solve needs, built once per (space, time) subdomain.
struct LocalProblem {
  SpaceSubdomain sub;
  int k_begin = 0, k_end = 0;
  StateVector xb_loc;
  TsvdPrecon precon_loc;
  std::vector<double> mask_loc;
  std::vector<double> rinv_loc;
  std::vector<std::vector<double>> obs_loc;  // k_end - k_begin vectors
  double lambda = 1.0;
};

LocalProblem build_local_problem(const AssimilationSetup& setup, const DomainDecomposition& dd,
                                 int ispace, int itime) {
  LocalProblem lp;
  lp.sub = dd.space[static_cast<size_t>(ispace)];
  lp.k_begin = dd.time[static_cast<size_t>(itime)].k_begin;
  lp.k_end = dd.time[static_cast<size_t>(itime)].k_end;
  lp.lambda = setup.lambda;
  lp.xb_loc = restrict_state(setup.x_b, lp.sub);

  // Local background covariance rebuilt from the restricted background
  // (local mean), so each local functional is self-contained.
  const BackgroundCov cov = build_background_cov(lp.xb_loc);
  const TsvdResult ts = tsvd(cov, setup.precon.nsvs > 0 ? setup.precon.nsvs : 1,
                             setup.precon.rel_tol);
  if (!ts.ok()) throw std::runtime_error("solve_dd: local TSVD failed");
  lp.precon_loc = ts.precon;

  const int nlon = setup.grid.nlon, nlat = setup.grid.nlat;
  lp.mask_loc = restrict_vector(setup.H.mask, nlon, nlat, lp.sub);
  lp.rinv_loc = restrict_vector(setup.rinv.rinv, nlon, nlat, lp.sub);
  for (int k = lp.k_begin; k < lp.k_end; ++k)
    lp.obs_loc.push_back(restrict_vector(setup.obs.obs[static_cast<size_t>(k)], nlon, nlat, lp.sub));
  return lp;
}

// Local cost (and optional gradient) with exterior model values frozen from
// ref_traj (states of the reference trajectory at steps 0..T-1) and overlap
// penalty against `trace` (local layout).
double local_eval(const LocalProblem& lp, const AssimilationSetup& setup,
                  const std::vector<StateVector>& ref_traj, const StateVector& x_local,
                  double mu, const StateVector& trace, StateVector* grad) {
  const SphereGrid& grid = setup.grid;
  const int spo = setup.steps_per_obs;

  // Background term.
  std::vector<double> d(x_local.data.size());
  for (size_t n = 0; n < d.size(); ++n) d[n] = x_local.data[n] - lp.xb_loc.data[n];
  const std::vector<double> bd = apply_Binv(lp.precon_loc, d);
  double j = dot(d, bd);
  if (grad) {
    *grad = StateVector(x_local.nlon, x_local.nlat);
    for (size_t n = 0; n < grad->data.size(); ++n) grad->data[n] = 2.0 * bd[n];
  }

  // Forward pass through the window, recording the embedded global bases
  // the adjoint sweeps need.
  const int last_k = lp.k_end - 1;
  const int nsteps = last_k * spo;
  std::vector<StateVector> gbases;  // base state before each step
  gbases.reserve(static_cast<size_t>(nsteps));
  std::vector<StateVector> at_obs(static_cast<size_t>(lp.k_end));  // local states at obs times

  StateVector cur = x_local;
  for (int k = 0; k <= last_k; ++k) {
    if (k >= lp.k_begin) at_obs[static_cast<size_t>(k)] = cur;
    if (k == last_k) break;
    for (int s = 0; s < spo; ++s) {
      const int gs = k * spo + s;
      StateVector base = ref_traj[static_cast<size_t>(gs)];
      embed_window(cur, lp.sub, base);
      gbases.push_back(base);
      const StateVector next = step(base, grid, setup.params);
      cur = restrict_state(next, lp.sub);
    }
  }

  // Observation terms over this subdomain's index range.
  for (int k = lp.k_begin; k < lp.k_end; ++k) {
    const StateVector& xk = at_obs[static_cast<size_t>(k)];
    const std::vector<double>& vk = lp.obs_loc[static_cast<size_t>(k - lp.k_begin)];
    std::vector<double> m(xk.data.size());
    for (size_t n = 0; n < m.size(); ++n) m[n] = lp.mask_loc[n] * xk.data[n] - vk[n];
    for (size_t n = 0; n < m.size(); ++n) j += lp.lambda * lp.rinv_loc[n] * m[n] * m[n];

    if (grad) {
      StateVector ybar(x_local.nlon, x_local.nlat);
      for (size_t n = 0; n < m.size(); ++n) ybar.data[n] = lp.mask_loc[n] * lp.rinv_loc[n] * m[n];
      for (int gs = k * spo - 1; gs >= 0; --gs) {
        const StateVector yg = adjoint_step(gbases[static_cast<size_t>(gs)],
                                            inject_zero(ybar, lp.sub, grid.nlon, grid.nlat), grid,
                                            setup.params);
        ybar = restrict_state(yg, lp.sub);
      }
      for (size_t n = 0; n < grad->data.size(); ++n)
        grad->data[n] += 2.0 * lp.lambda * ybar.data[n];
    }
  }

  if (mu != 0.0) j += overlap_penalty(x_local, trace, lp.sub, mu, grad ? grad : nullptr);
  return j;
}

}  // namespace

DomainDecomposition decompose(const SphereGrid& grid, int nt_obs, int n_space, int n_time,
                              int halo, double mu) {
  if (n_space < 1 || n_time < 1) throw std::invalid_argument("decompose: need >= 1 subdomain");
  if (halo < 0) throw std::invalid_argument("decompose: halo must be >= 0");
  if (n_time > nt_obs) throw std::invalid_argument("decompose: more time subdomains than observations");
  DomainDecomposition dd;
  dd.mu = mu;
  dd.nlon = grid.nlon;
  dd.nlat = grid.nlat;

  int start = 0;
  for (int s = 0; s < n_space; ++s) {
    SpaceSubdomain sub;
    sub.lon_start = start;
    sub.lon_count = grid.nlon / n_space + (s < grid.nlon % n_space ? 1 : 0);
    sub.halo = halo;
    if (sub.lon_count < 2 * halo + 1)
      throw std::invalid_argument("decompose: strip thinner than 2*halo+1");
    if (sub.width() > grid.nlon)
      throw std::invalid_argument("decompose: halo window exceeds the longitude circle");
    start += sub.lon_count;
    dd.space.push_back(sub);
  }

  for (int t = 0; t < n_time; ++t) {
    TimeSubdomain ts;
    ts.k_begin = t * nt_obs / n_time;
    ts.k_end = (t + 1) * nt_obs / n_time;
    if (t > 0 && n_time > 1) ts.k_begin -= 1;  // one-index overlap
    dd.time.push_back(ts);
  }
  return dd;
}

StateVector restrict_state(const StateVector& x, const SpaceSubdomain& sub) {
  const int w = sub.width();
  StateVector loc(w, x.nlat);
  for (int j = 0; j < x.nlat; ++j)
    for (int li = 0; li < w; ++li) {
      const int gi = wrap_lon(sub.first() + li, x.nlon);
      loc.u(li, j) = x.u(gi, j);
      loc.v(li, j) = x.v(gi, j);
      loc.h(li, j) = x.h(gi, j);
    }
  return loc;
}

std::vector<double> restrict_vector(const std::vector<double>& x, int nlon, int nlat,
                                    const SpaceSubdomain& sub) {
  const int w = sub.width();
  const int gc = nlon * nlat, lc = w * nlat;
  std::vector<double> loc(static_cast<size_t>(3 * lc));
  for (int f = 0; f < 3; ++f)
    for (int j = 0; j < nlat; ++j)
      for (int li = 0; li < w; ++li) {
        const int gi = wrap_lon(sub.first() + li, nlon);
        loc[static_cast<size_t>(f * lc + li + j * w)] = x[static_cast<size_t>(f * gc + gi + j * nlon)];
      }
  return loc;
}

StateVector extend_and_sum(const std::vector<StateVector>& locals, const DomainDecomposition& dd) {
  if (locals.size() != dd.space.size() * dd.time.size())
    throw std::invalid_argument("extend_and_sum: one local per subdomain required");
  StateVector out(dd.nlon, dd.nlat);
  std::vector<double> cover(static_cast<size_t>(dd.nlon), 0.0);
  for (const SpaceSubdomain& sub : dd.space)
    for (int i = 0; i < dd.nlon; ++i)
      if (window_contains(sub, i, dd.nlon)) cover[static_cast<size_t>(i)] += 1.0;
  for (double& c : cover) c *= static_cast<double>(dd.time.size());

  for (size_t t = 0; t < dd.time.size(); ++t)
    for (size_t s = 0; s < dd.space.size(); ++s) {
      const SpaceSubdomain& sub = dd.space[s];
      const StateVector& loc = locals[t * dd.space.size() + s];
      for (int j = 0; j < dd.nlat; ++j)
        for (int li = 0; li < sub.width(); ++li) {
          const int gi = wrap_lon(sub.first() + li, dd.nlon);
          out.u(gi, j) += loc.u(li, j);
          out.v(gi, j) += loc.v(li, j);
          out.h(gi, j) += loc.h(li, j);
        }
    }
  for (int j = 0; j < dd.nlat; ++j)
    for (int i = 0; i < dd.nlon; ++i) {
      if (cover[static_cast<size_t>(i)] == 0.0)
        throw std::runtime_error("extend_and_sum: uncovered cell");
      out.u(i, j) /= cover[static_cast<size_t>(i)];
      out.v(i, j) /= cover[static_cast<size_t>(i)];
      out.h(i, j) /= cover[static_cast<size_t>(i)];
    }
  return out;
}

double overlap_penalty(const StateVector& x_local, const StateVector& trace,
                       const SpaceSubdomain& sub, double mu, StateVector* grad) {
  double pen = 0.0;
  const int w = sub.width();
  auto cell = [&](int li, int j) {
    const double du = x_local.u(li, j) - trace.u(li, j);
    const double dv = x_local.v(li, j) - trace.v(li, j);
    const double dh = x_local.h(li, j) - trace.h(li, j);
    pen += mu * (du * du + dv * dv + dh * dh);
    if (grad) {
      grad->u(li, j) += 2.0 * mu * du;
      grad->v(li, j) += 2.0 * mu * dv;
      grad->h(li, j) += 2.0 * mu * dh;
    }
  };
  for (int j = 0; j < x_local.nlat; ++j) {
    for (int li = 0; li < sub.halo; ++li) cell(li, j);
    for (int li = w - sub.halo; li < w; ++li) cell(li, j);
  }
  return pen;
}

double local_cost(const AssimilationSetup& setup, const DomainDecomposition& dd, int ispace,
                  int itime, const StateVector& x_local, const StateVector& reference) {
  const LocalProblem lp = build_local_problem(setup, dd, ispace, itime);
  const int total = (setup.nt_obs() - 1) * setup.steps_per_obs;
  const LinearizationPoint lin = linearize(reference, setup.grid, setup.params, total);
  const StateVector trace = restrict_state(reference, lp.sub);
  return local_eval(lp, setup, lin.trajectory, x_local, dd.mu, trace, nullptr);
}

DAResult solve_dd(const AssimilationSetup& setup, const DomainDecomposition& dd,
                  const DDOptions& opts) {
  if (setup.precon.singular_values.empty()) {
    DAResult res;
    res.status = MinStatus::PreconFailure;
    res.x_da = setup.x_b;
    return res;
  }
  // A single full-width subdomain is definitionally the global problem;
  // dispatch directly so iteration counts match the plain solve exactly.
  if (dd.space.size() == 1 && dd.time.size() == 1 && dd.space[0].halo == 0 &&
      dd.space[0].lon_count == dd.nlon && dd.time[0].k_begin == 0 &&
      dd.time[0].k_end == setup.nt_obs()) {
    DAResult res = minimize(setup, opts.inner, opts.log ? IterCallback([&](const IterRecord& r) {
      opts.log(0, 0, r);
    }) : IterCallback{});
    res.sweep_costs.push_back(res.j_final);
    return res;
  }

  const int nsub = static_cast<int>(dd.space.size() * dd.time.size());
  std::vector<LocalProblem> problems;
  for (size_t t = 0; t < dd.time.size(); ++t)
    for (size_t s = 0; s < dd.space.size(); ++s)
      problems.push_back(build_local_problem(setup, dd, static_cast<int>(s), static_cast<int>(t)));

  DAResult res;
  StateVector assembled = setup.x_b;
  res.j_initial = eval_cost(assembled, setup);
  double best_j = res.j_initial;
  StateVector best_x = assembled;
  int total_iters = 0;
  res.status = MinStatus::MaxIterations;

  const int total_steps = (setup.nt_obs() - 1) * setup.steps_per_obs;
  std::vector<double> gstops(static_cast<size_t>(nsub), 0.0);  // frozen after sweep 1

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const LinearizationPoint lin = linearize(assembled, setup.grid, setup.params, total_steps);

    std::vector<StateVector> locals(static_cast<size_t>(nsub));
    for (int n = 0; n < nsub; ++n) {
      const LocalProblem& lp = problems[static_cast<size_t>(n)];
      const StateVector trace = restrict_state(assembled, lp.sub);
      const CostGradFn fn = [&](const StateVector& xl, StateVector& gl) {
        return local_eval(lp, setup, lin.trajectory, xl, dd.mu, trace, &gl);
      };
      MinimizeOptions inner = opts.inner;
      if (sweep == 0) {
        StateVector g0;
        fn(trace, g0);
        gstops[static_cast<size_t>(n)] = inner.gtol * std::max(1.0, norm2(g0.data));
      }
      inner.gtol_abs = gstops[static_cast<size_t>(n)];
      IterCallback cb;
      if (opts.log)
        cb = [&](const IterRecord& rec) { opts.log(sweep, n, rec); };
      const DAResult local = minimize_fn(fn, trace, inner, cb);
      total_iters += local.iterations;
      locals[static_cast<size_t>(n)] = local.x_da;
    }

    const StateVector next = extend_and_sum(locals, dd);
    double change = 0.0;
    for (size_t n = 0; n < next.data.size(); ++n) {
      const double diff = next.data[n] - assembled.data[n];
      change += diff * diff;
    }
    const double rel = std::sqrt(change) / std::max(1.0, norm2(assembled.data));
    assembled = next;
    const double j = eval_cost(assembled, setup);
    res.sweep_costs.push_back(j);
    if (j < best_j) {
      best_j = j;
      best_x = assembled;
    }
    if (rel < opts.sweep_tol) {
      res.status = MinStatus::Converged;
      break;
    }
  }

  res.x_da = best_x;
  res.iterations = total_iters;
  res.j_final = best_j;
  StateVector gfin;
  eval_cost_grad(res.x_da, setup, gfin);
  res.grad_norm_final = norm2(gfin.data);
  return res;
}

}  // namespace sw4dvar
