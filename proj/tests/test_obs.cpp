#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sw4dvar/obs.hpp"

using namespace sw4dvar;

namespace {

StateVector small_truth(const SphereGrid& g, uint64_t seed) {
  Rng rng(seed);
  StateVector x(g.nlon, g.nlat);
  for (int j = 0; j < g.nlat; ++j)
    for (int i = 0; i < g.nlon; ++i) {
      x.u(i, j) = 3.0 * rng.normal();
      x.v(i, j) = 3.0 * rng.normal();
      x.h(i, j) = 5000.0 + 10.0 * rng.normal();
    }
  return x;
}

}  // namespace

TEST_CASE("half-away-from-zero rounding") {
  CHECK(round_to_decimals(1.2349999, 2) == doctest::Approx(1.23).epsilon(1e-12));
  CHECK(round_to_decimals(1.2351, 2) == doctest::Approx(1.24).epsilon(1e-12));
  CHECK(round_to_decimals(2.5, 0) == 3.0);
  CHECK(round_to_decimals(-2.5, 0) == -3.0);
  CHECK(round_to_decimals(0.25, 1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(round_to_decimals(-0.25, 1) == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(round_to_decimals(0.0, 2) == 0.0);
}

TEST_CASE("order of magnitude") {
  CHECK(order_of_magnitude(0.0) == 0.0);
  CHECK(order_of_magnitude(1.0) == 1.0);
  CHECK(order_of_magnitude(9.99) == 1.0);
  CHECK(order_of_magnitude(0.02) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(order_of_magnitude(5234.0) == 1000.0);
  CHECK(order_of_magnitude(-5234.0) == 1000.0);
}

TEST_CASE("problems 1 and 3 round the full state") {
  const SphereGrid g = build_grid(10, 5);
  const StateVector truth = small_truth(g, 21);
  Rng rng(1);
  const ObsOperator H = build_obs_operator(1, g);

  const std::vector<double> o1 = make_observation(truth, 1, H, rng);
  const std::vector<double> o3 = make_observation(truth, 3, H, rng);
  for (size_t k = 0; k < o1.size(); ++k) {
    CHECK(std::abs(o1[k] - truth.data[k]) <= 0.5e-2 + 1e-12);
    CHECK(std::abs(o3[k] - truth.data[k]) <= 0.5e-1 + 1e-12);
    // Observed values carry at most 2 (resp. 1) decimals.
    CHECK(std::abs(o1[k] * 100.0 - std::round(o1[k] * 100.0)) < 1e-7);
    CHECK(std::abs(o3[k] * 10.0 - std::round(o3[k] * 10.0)) < 1e-8);
  }
}

TEST_CASE("problems 2 and 4 perturb only the mask") {
  const SphereGrid g = build_grid(10, 5);
  const StateVector truth = small_truth(g, 22);
  for (int problem : {2, 4}) {
    const ObsOperator H = build_obs_operator(problem, g);
    Rng rng(5);
    const std::vector<double> obs = make_observation(truth, problem, H, rng);
    int on_mask = 0;
    for (size_t k = 0; k < obs.size(); ++k) {
      if (H.mask[k] == 0.0) {
        CHECK(obs[k] == 0.0);
      } else {
        ++on_mask;
        CHECK(obs[k] != truth.data[k]);
        const double scale = problem == 2 ? 1.0 : order_of_magnitude(truth.data[k]);
        CHECK(std::abs(obs[k] - truth.data[k]) < 0.1 * scale);
      }
    }
    CHECK(on_mask == static_cast<int>(obs.size()) / 5);

    // Same seed reproduces the draws; a different one does not.
    Rng rng2(5), rng3(6);
    CHECK(make_observation(truth, problem, H, rng2) == obs);
    CHECK(make_observation(truth, problem, H, rng3) != obs);
  }
}

TEST_CASE("assimilation window placement") {
  AssimilationWindow w;
  w.nt_obs = 10;
  CHECK(w.base_step() == 21);
  CHECK(w.t_begin() == doctest::Approx(21 * 50.0));
  CHECK(w.t_end() == doctest::Approx(30 * 50.0));
  w.nt_obs = 1;
  CHECK(w.base_step() == 30);
}

TEST_CASE("window data follows the twin-experiment protocol") {
  const SphereGrid g = build_grid(12, 8);
  ModelParams mp;
  mp.p = 2;
  mp.q = 2;
  const StateVector x0 = small_truth(g, 30);
  const int ntobs = 4, total = 30;
  const WindowData wd = generate_window_data(x0, g, mp, ntobs, 1, 99, total);

  // x_b is the model state at the first observation time.
  ModelParams base = mp;
  base.msteps = total - ntobs + 1;
  CHECK(wd.x_b.data == integrate(x0, g, base).data);
  REQUIRE(static_cast<int>(wd.obs.obs.size()) == ntobs);

  // Observation k comes from the trajectory k steps past x_b (problem 1 is
  // deterministic, so it can be recomputed directly).
  const ObsOperator H = build_obs_operator(1, g);
  StateVector truth = wd.x_b;
  ModelParams one = mp;
  one.msteps = 1;
  Rng unused(99);
  for (int k = 0; k < ntobs; ++k) {
    if (k > 0) truth = integrate(truth, g, one);
    CHECK(wd.obs.obs[static_cast<size_t>(k)] == make_observation(truth, 1, H, unused));
  }

  CHECK_THROWS_AS(generate_window_data(x0, g, mp, 0, 1, 99, total), std::invalid_argument);
  CHECK_THROWS_AS(generate_window_data(x0, g, mp, 31, 1, 99, total), std::invalid_argument);
}
