#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sw4dvar/grid.hpp"
#include "sw4dvar/state.hpp"

using namespace sw4dvar;

TEST_CASE("grid spacing and coordinates") {
  const SphereGrid g = build_grid(72, 36);
  CHECK(g.nlon == 72);
  CHECK(g.nlat == 36);
  CHECK(g.dlambda == doctest::Approx(2.0 * M_PI / 72).epsilon(1e-15));
  CHECK(g.dtheta == doctest::Approx(M_PI / 36).epsilon(1e-15));
  CHECK(g.lambda[0] == 0.0);
  CHECK(g.lambda[71] == doctest::Approx(2.0 * M_PI - g.dlambda).epsilon(1e-14));

  // Latitudes offset half a cell from the poles, symmetric about the equator.
  CHECK(g.theta[0] == doctest::Approx(-0.5 * M_PI + 0.5 * g.dtheta).epsilon(1e-14));
  for (int j = 0; j < 36; ++j) CHECK(g.theta[j] == doctest::Approx(-g.theta[35 - j]).epsilon(1e-12));
  for (int j = 0; j < 36; ++j) CHECK(std::cos(g.theta[j]) > 0.0);
}

TEST_CASE("grid constants") {
  const SphereGrid g = build_grid(8, 6);
  CHECK(g.a == doctest::Approx(6.371e6));
  CHECK(g.g == doctest::Approx(9.81));
  CHECK(g.omega == doctest::Approx(7.292e-5));
}

TEST_CASE("grid size validation") {
  CHECK_THROWS_AS(build_grid(2, 10), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(10, 2), std::invalid_argument);
  CHECK_NOTHROW(build_grid(3, 3));
}

TEST_CASE("longitude wrap is periodic") {
  CHECK(wrap_lon(0, 8) == 0);
  CHECK(wrap_lon(8, 8) == 0);
  CHECK(wrap_lon(-1, 8) == 7);
  CHECK(wrap_lon(-9, 8) == 7);
  CHECK(wrap_lon(17, 8) == 1);
}

TEST_CASE("latitude clamp closes the poles") {
  CHECK(clamp_lat(-1, 6) == 0);
  CHECK(clamp_lat(-3, 6) == 0);
  CHECK(clamp_lat(6, 6) == 5);
  CHECK(clamp_lat(9, 6) == 5);
  CHECK(clamp_lat(3, 6) == 3);
}

TEST_CASE("state layout and vector helpers") {
  StateVector x(4, 3);
  CHECK(x.size() == 36);
  x.u(1, 2) = 5.0;
  x.v(1, 2) = 6.0;
  x.h(1, 2) = 7.0;
  CHECK(x.data[1 + 2 * 4] == 5.0);
  CHECK(x.data[12 + 1 + 2 * 4] == 6.0);
  CHECK(x.data[24 + 1 + 2 * 4] == 7.0);

  std::vector<double> a = {1.0, 2.0, 3.0}, b = {4.0, -5.0, 6.0};
  CHECK(dot(a, b) == doctest::Approx(12.0));
  CHECK(norm2(a) == doctest::Approx(std::sqrt(14.0)));
  axpy(2.0, a, b);
  CHECK(b[0] == doctest::Approx(6.0));
  CHECK(b[2] == doctest::Approx(12.0));
}
