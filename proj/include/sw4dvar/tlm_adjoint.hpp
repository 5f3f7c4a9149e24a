#pragma once

#include <vector>

#include "sw4dvar/model.hpp"

namespace sw4dvar {

/// States 0..msteps-1 of a nonlinear run: one linearization state per step.
struct LinearizationPoint {
  std::vector<StateVector> trajectory;
  SphereGrid grid;
  ModelParams params;

  int msteps() const { return static_cast<int>(trajectory.size()); }
};

/// Runs the nonlinear model for msteps and records the state before each
/// step, i.e. exactly what the window operators below need.
LinearizationPoint linearize(const StateVector& x0, const SphereGrid& grid,
                             const ModelParams& params, int msteps);

/// Tangent-linear one-step map: (I + dt * J(base)) * delta, with J the exact
/// Jacobian of rhs at base, applied matrix-free.
StateVector tlm_step(const StateVector& base, const StateVector& delta, const SphereGrid& grid,
                     const ModelParams& params);

/// Exact transpose of tlm_step's linear map at base, applied to ybar.
StateVector adjoint_step(const StateVector& base, const StateVector& ybar, const SphereGrid& grid,
                         const ModelParams& params);

/// Chains tlm_step through the stored trajectory.
StateVector tlm_window(const LinearizationPoint& lin, const StateVector& delta);

/// Reverse-order chain of adjoint_step through the stored trajectory.
StateVector adjoint_window(const LinearizationPoint& lin, const StateVector& ybar);

/// Same, restricted to the first nsteps entries of the trajectory.
StateVector adjoint_window(const LinearizationPoint& lin, const StateVector& ybar, int nsteps);

}  // namespace sw4dvar
