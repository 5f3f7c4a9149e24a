#pragma once

#include <cstdint>

#include "sw4dvar/grid.hpp"
#include "sw4dvar/state.hpp"

namespace sw4dvar {

/// Which form of the meridional-momentum stencil to use.
///
/// AsPrinted keeps the published stencil verbatim, including its
/// v-equation advection term built from u-differences. Corrected replaces
/// that term with the v-differences the continuous equations call for.
/// Both have exact tangent-linear/adjoint counterparts.
enum class StencilVariant { AsPrinted, Corrected };

struct ModelParams {
  double dt = 50.0;   // seconds
  double alpha = 1.0 / 3.0;
  int p = 4;          // zonal gravity-wave stencil half-width
  int q = 2;          // meridional gravity-wave stencil half-width
  int msteps = 30;
  StencilVariant variant = StencilVariant::AsPrinted;
};

/// Throws if params violate their invariants or the grid is too small for
/// the (p, q) stencil (nlon >= 2p+1, nlat >= 2q+1).
void validate(const ModelParams& params, const SphereGrid& grid);

/// Semi-discrete tendency (U, V, H) of the un-staggered wide-stencil scheme,
/// in per-second units. OpenMP-parallel over grid cells; output is bitwise
/// independent of thread count (pure gather).
StateVector rhs(const StateVector& state, const SphereGrid& grid, const ModelParams& params);

/// Serial reference implementation of rhs, kept for testing and benchmarks.
/// Must match rhs() bitwise.
StateVector rhs_serial(const StateVector& state, const SphereGrid& grid, const ModelParams& params);

/// One forward-Euler application: state + dt * rhs(state).
StateVector step(const StateVector& state, const SphereGrid& grid, const ModelParams& params);

/// params.msteps-fold composition of step; msteps = 0 returns x0 unchanged.
StateVector integrate(const StateVector& x0, const SphereGrid& grid, const ModelParams& params);

/// Parameters of the synthetic height field: h = h_mean + a Gaussian random
/// field built from nlat/2 random-phase modes
///   amp * A_m * cos(k lambda + phi) * cos(l theta + psi) * cos(theta)^k,
/// A_m ~ N(0,1), k in [1, min(12, nlon/6)], l in [1, min(6, nlat/6)].
/// The cos(theta)^k envelope is the polar decay of a spherical harmonic of
/// zonal order k; without it the 1/cos(theta) metric terms excite fast
/// polar oscillations.
struct SynthFieldParams {
  double h_mean = 5000.0;  // meters
  double h_std = 10.0;     // meters, target field standard deviation
};

/// Synthetic initial state: u = v = 0, h as described above. Deterministic
/// for a given seed.
StateVector synth_initial(uint64_t seed, const SphereGrid& grid,
                          const SynthFieldParams& field = SynthFieldParams{});

}  // namespace sw4dvar
