#include "sw4dvar/model.hpp"

#include <cmath>
#include <stdexcept>

#include "sw4dvar/rng.hpp"

namespace sw4dvar {

void validate(const ModelParams& params, const SphereGrid& grid) {
  if (!(params.dt >= 0.0)) throw std::invalid_argument("ModelParams: dt must be >= 0");
  if (!(params.alpha > 0.0 && params.alpha < 1.0))
    throw std::invalid_argument("ModelParams: alpha must be in (0, 1)");
  if (params.p < 1 || params.q < 1) throw std::invalid_argument("ModelParams: p, q must be >= 1");
  if (params.msteps < 0) throw std::invalid_argument("ModelParams: msteps must be >= 0");
  if (grid.nlon < 2 * params.p + 1 || grid.nlat < 2 * params.q + 1)
    throw std::invalid_argument("grid too small for (p, q) stencil");
}

namespace {

// Tendency at one cell. All neighbor access goes through wrap_lon/clamp_lat,
// so the same kernel serves interior and boundary rows.
inline void cell_tendency(const StateVector& s, const SphereGrid& g, const ModelParams& mp,
                          int i, int j, double& du, double& dv, double& dh) {
  const int nlon = g.nlon, nlat = g.nlat, p = mp.p, q = mp.q;
  const double alpha = mp.alpha;
  const double slon = 1.0 / (2.0 * g.a * g.dlambda);
  const double slat = 1.0 / (2.0 * g.a * g.dtheta);

  const int ip1 = wrap_lon(i + 1, nlon), im1 = wrap_lon(i - 1, nlon);
  const int ipp = wrap_lon(i + p, nlon), imp = wrap_lon(i - p, nlon);
  const int jp1 = clamp_lat(j + 1, nlat), jm1 = clamp_lat(j - 1, nlat);
  const int jpq = clamp_lat(j + q, nlat), jmq = clamp_lat(j - q, nlat);

  const double th = g.theta[j];
  const double c = std::cos(th), t = std::tan(th);
  const double f = 2.0 * g.omega * std::sin(th);
  const double thp = g.theta[jpq], thm = g.theta[jmq];
  const double cqp = std::cos(thp), cqm = std::cos(thm);
  const double fqp = 2.0 * g.omega * std::sin(thp), fqm = 2.0 * g.omega * std::sin(thm);
  const double tqp = std::tan(thp), tqm = std::tan(thm);

  const double uij = s.u(i, j), vij = s.v(i, j), hij = s.h(i, j);

  du = -slon * uij / c * (s.u(ip1, j) - s.u(im1, j))
       - slat * vij * (s.u(i, jp1) - s.u(i, jm1))
       - slon * g.g / (p * c) * (s.h(ipp, j) - s.h(imp, j))
       + 2.0 * ((1.0 - alpha) * (f + uij * t / g.a) * vij
                + 0.5 * alpha * (f + s.u(ipp, j) * t / g.a) * s.v(ipp, j)
                + 0.5 * alpha * (f + s.u(imp, j) * t / g.a) * s.v(imp, j));

  const double adv_v = (mp.variant == StencilVariant::AsPrinted)
                           ? (s.u(i, jp1) - s.u(i, jm1))
                           : (s.v(i, jp1) - s.v(i, jm1));
  dv = -slon * uij / c * (s.v(ip1, j) - s.v(im1, j))
       - slat * vij * adv_v
       - slat * g.g / q * (s.h(i, jpq) - s.h(i, jmq))
       - 2.0 * ((1.0 - alpha) * (f + uij * t / g.a) * uij
                + 0.5 * alpha * (fqp + s.u(i, jpq) * tqp / g.a) * s.u(i, jpq)
                + 0.5 * alpha * (fqm + s.u(i, jmq) * tqm / g.a) * s.u(i, jmq));

  dh = -alpha * (slon * uij / c * (s.h(ip1, j) - s.h(im1, j))
                 + slat * vij * (s.h(i, jp1) - s.h(i, jm1))
                 + slon * hij / c
                       * ((1.0 - alpha) * (s.u(ipp, j) - s.u(imp, j))
                          + 0.5 * alpha
                                * (s.u(ipp, jpq) - s.u(imp, jpq) + s.u(ipp, jmq) - s.u(imp, jmq)))
                       / p
                 + slat
                       * ((1.0 - alpha) * (s.v(i, jpq) * cqp - s.v(i, jmq) * cqm)
                          + 0.5 * alpha * (s.v(ipp, jpq) * cqp - s.v(ipp, jmq) * cqm)
                          + 0.5 * alpha * (s.v(imp, jpq) * cqp - s.v(imp, jmq) * cqm))
                       / q);
}

void check_inputs(const StateVector& state, const SphereGrid& grid, const ModelParams& params) {
  validate(params, grid);
  if (state.nlon != grid.nlon || state.nlat != grid.nlat)
    throw std::invalid_argument("state/grid size mismatch");
  if (!state.finite()) throw std::invalid_argument("non-finite input state");
}

}  // namespace

StateVector rhs(const StateVector& state, const SphereGrid& grid, const ModelParams& params) {
  check_inputs(state, grid, params);
  StateVector out(grid.nlon, grid.nlat);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < grid.nlat; ++j)
    for (int i = 0; i < grid.nlon; ++i)
      cell_tendency(state, grid, params, i, j, out.u(i, j), out.v(i, j), out.h(i, j));
  return out;
}

StateVector rhs_serial(const StateVector& state, const SphereGrid& grid,
                       const ModelParams& params) {
  check_inputs(state, grid, params);
  StateVector out(grid.nlon, grid.nlat);
  for (int j = 0; j < grid.nlat; ++j)
    for (int i = 0; i < grid.nlon; ++i)
      cell_tendency(state, grid, params, i, j, out.u(i, j), out.v(i, j), out.h(i, j));
  return out;
}

StateVector step(const StateVector& state, const SphereGrid& grid, const ModelParams& params) {
  StateVector tend = rhs(state, grid, params);
  StateVector out = state;
  for (size_t n = 0; n < out.data.size(); ++n) out.data[n] += params.dt * tend.data[n];
  return out;
}

StateVector integrate(const StateVector& x0, const SphereGrid& grid, const ModelParams& params) {
  StateVector x = x0;
  for (int s = 0; s < params.msteps; ++s) x = step(x, grid, params);
  return x;
}

StateVector synth_initial(uint64_t seed, const SphereGrid& grid, const SynthFieldParams& field) {
  Rng rng(seed);
  StateVector x(grid.nlon, grid.nlat);
  const int nmodes = std::max(1, grid.nlat / 2);
  const int kmax = std::max(1, std::min(12, grid.nlon / 6));
  const int lmax = std::max(1, std::min(6, grid.nlat / 6));
  const double amp = 2.0 * field.h_std / std::sqrt(static_cast<double>(nmodes));

  for (int i = 0; i < grid.nlon; ++i)
    for (int j = 0; j < grid.nlat; ++j) x.h(i, j) = field.h_mean;

  for (int m = 0; m < nmodes; ++m) {
    const double A = rng.normal();
    const int k = rng.uniform_int(1, kmax);
    const int l = rng.uniform_int(1, lmax);
    const double phi = 2.0 * M_PI * rng.uniform();
    const double psi = 2.0 * M_PI * rng.uniform();
    for (int j = 0; j < grid.nlat; ++j) {
      const double th = grid.theta[j];
      const double lat_part = std::cos(l * th + psi) * std::pow(std::cos(th), k);
      for (int i = 0; i < grid.nlon; ++i)
        x.h(i, j) += amp * A * std::cos(k * grid.lambda[i] + phi) * lat_part;
    }
  }
  return x;
}

}  // namespace sw4dvar
