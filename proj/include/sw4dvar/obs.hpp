#pragma once

#include <cstdint>
#include <vector>

#include "sw4dvar/error_models.hpp"
#include "sw4dvar/model.hpp"
#include "sw4dvar/rng.hpp"

namespace sw4dvar {

/// The assimilation window in time: nt_obs observation times ending at model
/// step `total_steps` (30 by default), background at the first of them.
struct AssimilationWindow {
  int nt_obs = 1;
  int total_steps = 30;
  double dt = 50.0;

  int base_step() const { return total_steps - nt_obs + 1; }
  double t_begin() const { return base_step() * dt; }
  double t_end() const { return total_steps * dt; }
};

struct ObservationSet {
  std::vector<std::vector<double>> obs;  // nt_obs vectors of state length
  int problem = 1;
  uint64_t seed = 0;
};

/// Half-away-from-zero rounding at d decimal places.
double round_to_decimals(double x, int d);

/// 10^floor(log10|x|); 0 for x = 0.
double order_of_magnitude(double x);

/// One observation vector from a truth state.
/// Problem 1: elementwise rounding at 2 decimals, full vector.
/// Problem 3: same at 1 decimal.
/// Problem 2: truth + 0.01*N(0,1) on the mask, 0 elsewhere.
/// Problem 4: truth + 0.01*O(truth_i)*N(0,1) on the mask, 0 elsewhere.
/// Normal draws are consumed in linear index order over the mask.
std::vector<double> make_observation(const StateVector& truth, int problem,
                                     const ObsOperator& H, Rng& rng);

struct WindowData {
  StateVector x_b;
  ObservationSet obs;
};

/// Twin-experiment data: x_b = M^{total-nt_obs+1}(x0), observation n built
/// from the truth at step total-nt_obs+n, n = 1..nt_obs. The truth
/// trajectory is computed once and reused.
WindowData generate_window_data(const StateVector& x0, const SphereGrid& grid,
                                const ModelParams& params, int nt_obs, int problem,
                                uint64_t seed, int total_steps = 30);

}  // namespace sw4dvar
