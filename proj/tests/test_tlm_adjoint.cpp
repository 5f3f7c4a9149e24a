#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "sw4dvar/rng.hpp"
#include "sw4dvar/tlm_adjoint.hpp"

using namespace sw4dvar;

namespace {

StateVector random_state(const SphereGrid& g, uint64_t seed, double uscale, double hbase) {
  Rng rng(seed);
  StateVector x(g.nlon, g.nlat);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) {
      x.u(i, j) = uscale * rng.normal();
      x.v(i, j) = uscale * rng.normal();
      x.h(i, j) = hbase + 10.0 * rng.normal();
    }
  return x;
}

StateVector unit_random(const SphereGrid& g, Rng& rng) {
  StateVector x(g.nlon, g.nlat);
  for (double& v : x.data) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("linearize records the trajectory") {
  const SphereGrid g = build_grid(8, 6);
  ModelParams mp;
  mp.p = 2;
  const StateVector x0 = random_state(g, 1, 5.0, 5000.0);
  const LinearizationPoint lin = linearize(x0, g, mp, 4);
  CHECK(lin.msteps() == 4);
  CHECK(lin.trajectory[0].data == x0.data);
  CHECK(lin.trajectory[1].data == step(x0, g, mp).data);
  CHECK(linearize(x0, g, mp, 0).msteps() == 0);
}

TEST_CASE("tlm_step matches central finite differences") {
  const SphereGrid g = build_grid(8, 6);
  ModelParams mp;
  mp.p = 2;
  const StateVector x = random_state(g, 2, 5.0, 5000.0);
  Rng rng(77);
  const StateVector d = unit_random(g, rng);

  const double eps = 1e-2;
  StateVector xp = x, xm = x;
  axpy(eps, d.data, xp.data);
  axpy(-eps, d.data, xm.data);
  const StateVector sp = step(xp, g, mp), sm = step(xm, g, mp);
  const StateVector td = tlm_step(x, d, g, mp);

  double num = 0.0, den = 0.0;
  for (size_t n = 0; n < td.data.size(); ++n) {
    const double fd = (sp.data[n] - sm.data[n]) / (2.0 * eps);
    num += (fd - td.data[n]) * (fd - td.data[n]);
    den += td.data[n] * td.data[n];
  }
  CHECK(std::sqrt(num / den) < 1e-7);
}

TEST_CASE("dot-product test, single step and windows") {
  const SphereGrid g = build_grid(8, 6);
  ModelParams mp;
  mp.p = 2;
  for (StencilVariant variant : {StencilVariant::AsPrinted, StencilVariant::Corrected}) {
    mp.variant = variant;
    const StateVector x0 = random_state(g, 3, 5.0, 5000.0);
    Rng rng(123);
    for (int nsteps : {1, 5, 10}) {
      const LinearizationPoint lin = linearize(x0, g, mp, nsteps);
      for (int trial = 0; trial < 5; ++trial) {
        const StateVector d = unit_random(g, rng), y = unit_random(g, rng);
        const StateVector md = tlm_window(lin, d);
        const StateVector aty = adjoint_window(lin, y);
        const double lhs = dot(md, y), rhs_ = dot(d, aty);
        CHECK(std::abs(lhs - rhs_) <= 1e-12 * norm2(md) * norm2(y));
      }
    }
  }
}

TEST_CASE("dense assembly on a 4x3 grid is an exact transpose pair") {
  const SphereGrid g = build_grid(4, 3);
  ModelParams mp;
  mp.p = 1;
  mp.q = 1;
  const StateVector x = random_state(g, 4, 3.0, 5000.0);
  const int n = g.nstate();

  // Columns of the TLM and rows of the adjoint, assembled via basis vectors.
  std::vector<std::vector<double>> tlm_cols(n), adj_cols(n);
  for (int k = 0; k < n; ++k) {
    StateVector e(g.nlon, g.nlat);
    e.data[static_cast<size_t>(k)] = 1.0;
    tlm_cols[k] = tlm_step(x, e, g, mp).data;
    adj_cols[k] = adjoint_step(x, e, g, mp).data;
  }
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) CHECK(adj_cols[r][k] == doctest::Approx(tlm_cols[k][r]).epsilon(1e-14));

  // And against the polarization-based dense oracle.
  const std::vector<std::vector<double>> want = oracle::dense_tlm(x, g, mp);
  for (int k = 0; k < n; ++k)
    for (int r = 0; r < n; ++r) {
      const double a = tlm_cols[k][r], b = want[k][r];
      CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("window operators match step-by-step chaining") {
  const SphereGrid g = build_grid(8, 6);
  ModelParams mp;
  mp.p = 2;
  const StateVector x0 = random_state(g, 5, 5.0, 5000.0);
  const LinearizationPoint lin = linearize(x0, g, mp, 6);
  Rng rng(9);
  const StateVector d = unit_random(g, rng);

  StateVector fwd = d;
  for (int s = 0; s < 6; ++s) fwd = tlm_step(lin.trajectory[s], fwd, g, mp);
  CHECK(tlm_window(lin, d).data == fwd.data);

  StateVector bwd = d;
  for (int s = 5; s >= 0; --s) bwd = adjoint_step(lin.trajectory[s], bwd, g, mp);
  CHECK(adjoint_window(lin, d).data == bwd.data);

  // Restricting the adjoint to a prefix of the window.
  StateVector part = d;
  for (int s = 3; s >= 0; --s) part = adjoint_step(lin.trajectory[s], part, g, mp);
  CHECK(adjoint_window(lin, d, 4).data == part.data);
  CHECK(adjoint_window(lin, d, 0).data == d.data);
}

TEST_CASE("taylor test is second order") {
  const SphereGrid g = build_grid(8, 6);
  ModelParams mp;
  mp.p = 2;
  const StateVector x0 = random_state(g, 6, 5.0, 5000.0);
  const int nsteps = 8;
  const LinearizationPoint lin = linearize(x0, g, mp, nsteps);
  Rng rng(15);
  const StateVector d = unit_random(g, rng);
  const StateVector md = tlm_window(lin, d);

  ModelParams win = mp;
  win.msteps = nsteps;
  const StateVector mx = integrate(x0, g, win);

  auto residual = [&](double eps) {
    StateVector xp = x0;
    axpy(eps, d.data, xp.data);
    const StateVector mxp = integrate(xp, g, win);
    double r = 0.0;
    for (size_t n = 0; n < mx.data.size(); ++n) {
      const double e = mxp.data[n] - mx.data[n] - eps * md.data[n];
      r += e * e;
    }
    return std::sqrt(r);
  };
  const double r1 = residual(1e-1), r2 = residual(1e-2);
  const double order = std::log10(r1 / r2);
  CHECK(order >= 1.9);
  CHECK(order <= 2.1);
}
