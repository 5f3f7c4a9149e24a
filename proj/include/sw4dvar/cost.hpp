#pragma once

#include "sw4dvar/error_models.hpp"
#include "sw4dvar/obs.hpp"
#include "sw4dvar/tlm_adjoint.hpp"

namespace sw4dvar {

/// Everything the regularization functional consumes. Observation k sits
/// steps_per_obs*k model steps after the window start (steps_per_obs = 0
/// makes the functional exactly quadratic, which the minimizer tests use).
struct AssimilationSetup {
  StateVector x_b;
  ObservationSet obs;
  ObsOperator H;
  ObsErrWeights rinv;
  TsvdPrecon precon;
  double lambda = 1.0;
  SphereGrid grid;
  ModelParams params;
  int steps_per_obs = 1;

  int nt_obs() const { return static_cast<int>(obs.obs.size()); }
};

/// J(x) = (x - x_b)^T B+ (x - x_b)
///      + lambda * sum_k (H M^k x - v_k)^T R^-1 (H M^k x - v_k),
/// with M^0 the identity and B+ the TSVD pseudo-inverse. No 1/2 factor; the
/// gradient carries the 2.
double eval_cost(const StateVector& x, const AssimilationSetup& setup);

/// grad J = 2 B+ (x - x_b)
///        + 2 lambda * sum_k A_k^T H^T R^-1 (H M^k x - v_k),
/// where A_k^T is the adjoint window over k*steps_per_obs steps linearized
/// on the trajectory from x. Each k-term runs its own reverse sweep.
StateVector eval_grad(const StateVector& x, const AssimilationSetup& setup);

/// Cost and gradient from one shared trajectory (what the minimizer calls).
double eval_cost_grad(const StateVector& x, const AssimilationSetup& setup, StateVector& grad);

}  // namespace sw4dvar
