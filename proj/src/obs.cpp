#include "sw4dvar/obs.hpp"

#include <cmath>
#include <stdexcept>

namespace sw4dvar {

double round_to_decimals(double x, int d) {
  const double s = std::pow(10.0, d);
  return std::round(s * x) / s;
}

double order_of_magnitude(double x) {
  if (x == 0.0) return 0.0;
  return std::pow(10.0, std::floor(std::log10(std::fabs(x))));
}

std::vector<double> make_observation(const StateVector& truth, int problem,
                                     const ObsOperator& H, Rng& rng) {
  if (problem < 1 || problem > 4) throw std::invalid_argument("unknown problem id");
  const size_t n = truth.data.size();
  if (H.mask.size() != n) throw std::invalid_argument("mask/state length mismatch");
  std::vector<double> obs(n, 0.0);
  switch (problem) {
    case 1:
      for (size_t k = 0; k < n; ++k) obs[k] = round_to_decimals(truth.data[k], 2);
      break;
    case 3:
      for (size_t k = 0; k < n; ++k) obs[k] = round_to_decimals(truth.data[k], 1);
      break;
    case 2:
      for (size_t k = 0; k < n; ++k)
        if (H.mask[k] != 0.0) obs[k] = truth.data[k] + 0.01 * rng.normal();
      break;
    case 4:
      for (size_t k = 0; k < n; ++k)
        if (H.mask[k] != 0.0)
          obs[k] = truth.data[k] + 0.01 * order_of_magnitude(truth.data[k]) * rng.normal();
      break;
  }
  return obs;
}

WindowData generate_window_data(const StateVector& x0, const SphereGrid& grid,
                                const ModelParams& params, int nt_obs, int problem,
                                uint64_t seed, int total_steps) {
  if (nt_obs < 1) throw std::invalid_argument("nt_obs must be >= 1");
  if (nt_obs > total_steps) throw std::invalid_argument("nt_obs exceeds the step budget");

  ModelParams mp = params;
  mp.msteps = total_steps - nt_obs + 1;
  WindowData wd;
  wd.x_b = integrate(x0, grid, mp);
  wd.obs.problem = problem;
  wd.obs.seed = seed;

  const ObsOperator H = build_obs_operator(problem, grid);
  Rng rng(seed);
  ModelParams one = params;
  one.msteps = 1;
  StateVector truth = wd.x_b;  // truth at the first observation time
  for (int k = 0; k < nt_obs; ++k) {
    if (k > 0) truth = integrate(truth, grid, one);
    wd.obs.obs.push_back(make_observation(truth, problem, H, rng));
  }
  return wd;
}

}  // namespace sw4dvar
