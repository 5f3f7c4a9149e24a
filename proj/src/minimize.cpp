#include "sw4dvar/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace sw4dvar {

namespace {

// Two-loop recursion for the L-BFGS search direction.
struct Pair {
  std::vector<double> s, y;
  double rho;
};

std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<Pair>& hist) {
  std::vector<double> q = g;
  std::vector<double> alpha(hist.size());
  for (size_t k = hist.size(); k-- > 0;) {
    alpha[k] = hist[k].rho * dot(hist[k].s, q);
    axpy(-alpha[k], hist[k].y, q);
  }
  if (!hist.empty()) {
    const Pair& last = hist.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& x : q) x *= gamma;
  }
  for (size_t k = 0; k < hist.size(); ++k) {
    const double beta = hist[k].rho * dot(hist[k].y, q);
    axpy(alpha[k] - beta, hist[k].s, q);
  }
  for (double& x : q) x = -x;
  return q;
}

}  // namespace

DAResult minimize_fn(const CostGradFn& fn, const StateVector& x0, const MinimizeOptions& opts,
                     const IterCallback& cb) {
  DAResult res;
  StateVector x = x0;
  StateVector g;
  double j = fn(x, g);
  res.j_initial = j;

  StateVector best_x = x;
  double best_j = j;

  const double g0norm = norm2(g.data);
  const double gstop =
      opts.gtol_abs > 0.0 ? opts.gtol_abs : opts.gtol * std::max(1.0, g0norm);
  double gnorm = g0norm;

  std::deque<Pair> hist;
  int iter = 0;
  res.status = MinStatus::MaxIterations;

  if (gnorm <= gstop) {
    res.status = MinStatus::Converged;
  } else {
    while (iter < opts.maxiter) {
      std::vector<double> dir = lbfgs_direction(g.data, hist);
      double dg = dot(dir, g.data);
      if (!(dg < 0.0)) {  // not a descent direction; restart from steepest descent
        hist.clear();
        dir = g.data;
        for (double& v : dir) v = -v;
        dg = -dot(g.data, g.data);
      }

      // Armijo backtracking.
      double t = 1.0;
      if (hist.empty()) {
        // First iteration: scale so the initial trial step is modest.
        const double dnorm = norm2(dir);
        if (dnorm > 0.0) t = std::min(1.0, 1.0 / dnorm);
      }
      StateVector xt = x, gt;
      double jt = 0.0;
      bool accepted = false;
      for (int ls = 0; ls < opts.max_linesearch; ++ls) {
        xt = x;
        axpy(t, dir, xt.data);
        jt = fn(xt, gt);
        if (std::isfinite(jt) && jt <= j + opts.armijo_c1 * t * dg) {
          accepted = true;
          break;
        }
        t *= opts.backtrack;
      }
      if (!accepted) {
        res.status = MinStatus::LineSearchFailure;
        break;
      }

      Pair pr;
      pr.s.resize(x.data.size());
      pr.y.resize(x.data.size());
      for (size_t n = 0; n < x.data.size(); ++n) {
        pr.s[n] = xt.data[n] - x.data[n];
        pr.y[n] = gt.data[n] - g.data[n];
      }
      const double sy = dot(pr.s, pr.y);
      if (sy > 1e-30) {
        pr.rho = 1.0 / sy;
        hist.push_back(std::move(pr));
        if (static_cast<int>(hist.size()) > opts.memory) hist.pop_front();
      }

      x = std::move(xt);
      g = std::move(gt);
      j = jt;
      gnorm = norm2(g.data);
      ++iter;
      if (j < best_j) {
        best_j = j;
        best_x = x;
      }
      if (cb) cb(IterRecord{iter, j, gnorm, t});
      if (gnorm <= gstop) {
        res.status = MinStatus::Converged;
        break;
      }
    }
  }

  res.x_da = best_x;
  res.iterations = iter;
  res.j_final = best_j;
  res.grad_norm_final = gnorm;
  return res;
}

DAResult minimize(const AssimilationSetup& setup, const MinimizeOptions& opts,
                  const IterCallback& cb) {
  if (setup.precon.singular_values.empty()) {
    DAResult res;
    res.status = MinStatus::PreconFailure;
    res.x_da = setup.x_b;
    return res;
  }
  const CostGradFn fn = [&setup](const StateVector& x, StateVector& g) {
    return eval_cost_grad(x, setup, g);
  };
  return minimize_fn(fn, setup.x_b, opts, cb);
}

}  // namespace sw4dvar
