#pragma once

#include <functional>

#include "sw4dvar/cost.hpp"

namespace sw4dvar {

struct MinimizeOptions {
  int memory = 10;          // L-BFGS history length
  double gtol = 1e-8;       // stop when ||g|| <= gtol * max(1, ||g0||)
  double gtol_abs = 0.0;    // if > 0, absolute gradient threshold instead
  int maxiter = 200;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_linesearch = 40;
};

enum class MinStatus { Converged, MaxIterations, LineSearchFailure, PreconFailure };

struct DAResult {
  StateVector x_da;
  int iterations = 0;
  double j_initial = 0.0;
  double j_final = 0.0;
  double grad_norm_final = 0.0;
  MinStatus status = MinStatus::Converged;
  std::vector<double> sweep_costs;  // global J per outer sweep (solve_dd only)

  bool converged() const { return status == MinStatus::Converged; }
};

/// Per-iteration record for the JSON-lines log.
struct IterRecord {
  int iter;
  double j;
  double grad_norm;
  double step_length;
};
using IterCallback = std::function<void(const IterRecord&)>;

/// Generic limited-memory quasi-Newton driver over a cost/gradient callback.
/// Monotone by construction (Armijo backtracking, best iterate returned).
using CostGradFn = std::function<double(const StateVector&, StateVector&)>;
DAResult minimize_fn(const CostGradFn& fn, const StateVector& x0, const MinimizeOptions& opts,
                     const IterCallback& cb = nullptr);

/// 4D-Var solve: minimizes the setup's functional starting from x_b.
DAResult minimize(const AssimilationSetup& setup, const MinimizeOptions& opts = MinimizeOptions{},
                  const IterCallback& cb = nullptr);

}  // namespace sw4dvar
