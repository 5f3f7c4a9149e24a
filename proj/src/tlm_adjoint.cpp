#include "sw4dvar/tlm_adjoint.hpp"

#include <cmath>
#include <stdexcept>

namespace sw4dvar {

namespace {

enum Field { U = 0, V = 1, H = 2 };

// One coefficient of the linearized stencil at an output cell:
// d(out_f at the cell) / d(in_f at (ii, jj)) += c.
// Entries may repeat an input index (clamped latitude rows); both the
// tangent-linear sum and the adjoint scatter accumulate, so repeats are
// handled naturally.
struct Entry {
  int out_f;
  int in_f;
  int ii, jj;
  double c;
};

constexpr int kMaxEntries = 64;

// Exact linearization of the cell tendency in model.cpp. Any change there
// must be mirrored here; the finite-difference and dense-oracle tests guard
// the pairing.
int linearize_cell(const StateVector& s, const SphereGrid& g, const ModelParams& mp, int i, int j,
                   Entry* e) {
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
  int n = 0;

  // --- U equation ---
  // -slon*u/c * (u_{i+1} - u_{i-1})
  e[n++] = {U, U, i, j, -slon / c * (s.u(ip1, j) - s.u(im1, j))};
  e[n++] = {U, U, ip1, j, -slon * uij / c};
  e[n++] = {U, U, im1, j, slon * uij / c};
  // -slat*v * (u_{j+1} - u_{j-1})
  e[n++] = {U, V, i, j, -slat * (s.u(i, jp1) - s.u(i, jm1))};
  e[n++] = {U, U, i, jp1, -slat * vij};
  e[n++] = {U, U, i, jm1, slat * vij};
  // -slon*g/(p*c) * (h_{i+p} - h_{i-p})
  e[n++] = {U, H, ipp, j, -slon * g.g / (p * c)};
  e[n++] = {U, H, imp, j, slon * g.g / (p * c)};
  // Coriolis-averaged bracket, leading factor 2
  e[n++] = {U, U, i, j, 2.0 * (1.0 - alpha) * (t / g.a) * vij};
  e[n++] = {U, V, i, j, 2.0 * (1.0 - alpha) * (f + uij * t / g.a)};
  e[n++] = {U, U, ipp, j, alpha * (t / g.a) * s.v(ipp, j)};
  e[n++] = {U, V, ipp, j, alpha * (f + s.u(ipp, j) * t / g.a)};
  e[n++] = {U, U, imp, j, alpha * (t / g.a) * s.v(imp, j)};
  e[n++] = {U, V, imp, j, alpha * (f + s.u(imp, j) * t / g.a)};

  // --- V equation ---
  e[n++] = {V, U, i, j, -slon / c * (s.v(ip1, j) - s.v(im1, j))};
  e[n++] = {V, V, ip1, j, -slon * uij / c};
  e[n++] = {V, V, im1, j, slon * uij / c};
  if (mp.variant == StencilVariant::AsPrinted) {
    e[n++] = {V, V, i, j, -slat * (s.u(i, jp1) - s.u(i, jm1))};
    e[n++] = {V, U, i, jp1, -slat * vij};
    e[n++] = {V, U, i, jm1, slat * vij};
  } else {
    e[n++] = {V, V, i, j, -slat * (s.v(i, jp1) - s.v(i, jm1))};
    e[n++] = {V, V, i, jp1, -slat * vij};
    e[n++] = {V, V, i, jm1, slat * vij};
  }
  e[n++] = {V, H, i, jpq, -slat * g.g / q};
  e[n++] = {V, H, i, jmq, slat * g.g / q};
  e[n++] = {V, U, i, j, -2.0 * (1.0 - alpha) * (f + 2.0 * uij * t / g.a)};
  e[n++] = {V, U, i, jpq, -alpha * (fqp + 2.0 * s.u(i, jpq) * tqp / g.a)};
  e[n++] = {V, U, i, jmq, -alpha * (fqm + 2.0 * s.u(i, jmq) * tqm / g.a)};

  // --- H equation ---
  const double k1 = -alpha * slon / c;
  e[n++] = {H, U, i, j, k1 * (s.h(ip1, j) - s.h(im1, j))};
  e[n++] = {H, H, ip1, j, k1 * uij};
  e[n++] = {H, H, im1, j, -k1 * uij};
  const double k2 = -alpha * slat;
  e[n++] = {H, V, i, j, k2 * (s.h(i, jp1) - s.h(i, jm1))};
  e[n++] = {H, H, i, jp1, k2 * vij};
  e[n++] = {H, H, i, jm1, -k2 * vij};
  const double k3 = -alpha * slon / (c * p);
  const double bu = (1.0 - alpha) * (s.u(ipp, j) - s.u(imp, j))
                    + 0.5 * alpha
                          * (s.u(ipp, jpq) - s.u(imp, jpq) + s.u(ipp, jmq) - s.u(imp, jmq));
  e[n++] = {H, H, i, j, k3 * bu};
  e[n++] = {H, U, ipp, j, k3 * hij * (1.0 - alpha)};
  e[n++] = {H, U, imp, j, -k3 * hij * (1.0 - alpha)};
  e[n++] = {H, U, ipp, jpq, k3 * hij * 0.5 * alpha};
  e[n++] = {H, U, imp, jpq, -k3 * hij * 0.5 * alpha};
  e[n++] = {H, U, ipp, jmq, k3 * hij * 0.5 * alpha};
  e[n++] = {H, U, imp, jmq, -k3 * hij * 0.5 * alpha};
  const double k4 = -alpha * slat / q;
  e[n++] = {H, V, i, jpq, k4 * (1.0 - alpha) * cqp};
  e[n++] = {H, V, i, jmq, -k4 * (1.0 - alpha) * cqm};
  e[n++] = {H, V, ipp, jpq, k4 * 0.5 * alpha * cqp};
  e[n++] = {H, V, ipp, jmq, -k4 * 0.5 * alpha * cqm};
  e[n++] = {H, V, imp, jpq, k4 * 0.5 * alpha * cqp};
  e[n++] = {H, V, imp, jmq, -k4 * 0.5 * alpha * cqm};

  return n;
}

void check_pair(const StateVector& a, const StateVector& b, const SphereGrid& grid,
                const ModelParams& params) {
  validate(params, grid);
  if (a.nlon != grid.nlon || a.nlat != grid.nlat || b.nlon != grid.nlon || b.nlat != grid.nlat)
    throw std::invalid_argument("state/grid size mismatch");
  if (!a.finite() || !b.finite()) throw std::invalid_argument("non-finite input state");
}

}  // namespace

StateVector tlm_step(const StateVector& base, const StateVector& delta, const SphereGrid& grid,
                     const ModelParams& params) {
  check_pair(base, delta, grid, params);
  StateVector out = delta;
  const int ncells = grid.ncells();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < grid.nlat; ++j) {
    Entry buf[kMaxEntries];
    for (int i = 0; i < grid.nlon; ++i) {
      const int n = linearize_cell(base, grid, params, i, j, buf);
      double acc[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < n; ++k) {
        const Entry& e = buf[k];
        acc[e.out_f] += e.c * delta.data[static_cast<size_t>(e.in_f * ncells + e.ii + e.jj * grid.nlon)];
      }
      const int cell = i + j * grid.nlon;
      out.data[static_cast<size_t>(cell)] += params.dt * acc[U];
      out.data[static_cast<size_t>(ncells + cell)] += params.dt * acc[V];
      out.data[static_cast<size_t>(2 * ncells + cell)] += params.dt * acc[H];
    }
  }
  return out;
}

StateVector adjoint_step(const StateVector& base, const StateVector& ybar, const SphereGrid& grid,
                         const ModelParams& params) {
  check_pair(base, ybar, grid, params);
  StateVector out = ybar;
  const int nlon = grid.nlon, nlat = grid.nlat, ncells = grid.ncells();
  const int q = params.q;

  // Transposed application as a gather: for each input cell, visit every
  // output cell whose stencil can reach it and pick the matching
  // coefficients. Gather keeps the OpenMP result bitwise independent of the
  // thread count (no scatter races, fixed accumulation order).
#pragma omp parallel for schedule(static)
  for (int jj = 0; jj < nlat; ++jj) {
    Entry buf[kMaxEntries];
    for (int ii = 0; ii < nlon; ++ii) {
      // Candidate output longitudes: offsets {0, +-1, +-p}, deduplicated
      // (p == 1 or tiny grids can alias).
      int ios[5];
      int nio = 0;
      const int offs[5] = {0, 1, -1, params.p, -params.p};
      for (int d : offs) {
        const int io = wrap_lon(ii + d, nlon);
        bool seen = false;
        for (int k = 0; k < nio; ++k) seen = seen || (ios[k] == io);
        if (!seen) ios[nio++] = io;
      }
      double acc[3] = {0.0, 0.0, 0.0};
      const int jlo = jj - q < 0 ? 0 : jj - q;
      const int jhi = jj + q >= nlat ? nlat - 1 : jj + q;
      for (int jo = jlo; jo <= jhi; ++jo) {
        for (int k = 0; k < nio; ++k) {
          const int io = ios[k];
          const int n = linearize_cell(base, grid, params, io, jo, buf);
          const int ocell = io + jo * nlon;
          for (int m = 0; m < n; ++m) {
            const Entry& e = buf[m];
            if (e.ii == ii && e.jj == jj)
              acc[e.in_f] += e.c * ybar.data[static_cast<size_t>(e.out_f * ncells + ocell)];
          }
        }
      }
      const int cell = ii + jj * nlon;
      out.data[static_cast<size_t>(cell)] += params.dt * acc[U];
      out.data[static_cast<size_t>(ncells + cell)] += params.dt * acc[V];
      out.data[static_cast<size_t>(2 * ncells + cell)] += params.dt * acc[H];
    }
  }
  return out;
}

LinearizationPoint linearize(const StateVector& x0, const SphereGrid& grid,
                             const ModelParams& params, int msteps) {
  LinearizationPoint lin;
  lin.grid = grid;
  lin.params = params;
  lin.trajectory.reserve(static_cast<size_t>(msteps));
  StateVector x = x0;
  for (int s = 0; s < msteps; ++s) {
    lin.trajectory.push_back(x);
    x = step(x, grid, params);
  }
  return lin;
}

StateVector tlm_window(const LinearizationPoint& lin, const StateVector& delta) {
  StateVector d = delta;
  for (const StateVector& base : lin.trajectory) d = tlm_step(base, d, lin.grid, lin.params);
  return d;
}

StateVector adjoint_window(const LinearizationPoint& lin, const StateVector& ybar) {
  return adjoint_window(lin, ybar, lin.msteps());
}

StateVector adjoint_window(const LinearizationPoint& lin, const StateVector& ybar, int nsteps) {
  if (nsteps < 0 || nsteps > lin.msteps())
    throw std::invalid_argument("adjoint_window: nsteps out of range");
  StateVector y = ybar;
  for (int s = nsteps - 1; s >= 0; --s)
    y = adjoint_step(lin.trajectory[static_cast<size_t>(s)], y, lin.grid, lin.params);
  return y;
}

}  // namespace sw4dvar
