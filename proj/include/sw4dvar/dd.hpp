#pragma once

#include <vector>

#include "sw4dvar/minimize.hpp"

namespace sw4dvar {

/// Longitude strip with halo. Cells are lon_start..lon_start+lon_count-1
/// (interior) extended by halo on both sides with periodic wrap; all
/// latitudes are kept (latitude strips would interact with the clamped
/// polar closure).
struct SpaceSubdomain {
  int lon_start = 0;   // first interior longitude
  int lon_count = 0;   // interior width
  int halo = 0;

  int width() const { return lon_count + 2 * halo; }
  int first() const { return lon_start - halo; }  // may be negative; wrap when indexing
};

/// Contiguous observation-index range [k_begin, k_end). Time subdomains
/// restrict which observation terms a local functional sees; the control
/// variable stays the window-start state.
struct TimeSubdomain {
  int k_begin = 0;
  int k_end = 0;
};

struct DomainDecomposition {
  std::vector<SpaceSubdomain> space;
  std::vector<TimeSubdomain> time;
  double mu = 1.0;
  int nlon = 0;
  int nlat = 0;
};

/// Equal longitude strips (+-1 cell) with halo and periodic wrap; contiguous
/// observation ranges with one-index overlap when n_time > 1.
DomainDecomposition decompose(const SphereGrid& grid, int nt_obs, int n_space, int n_time,
                              int halo, double mu);

/// Extracts the subdomain's longitude window (halo included) for all three
/// fields; local layout mirrors StateVector with nlon = width().
StateVector restrict_state(const StateVector& x, const SpaceSubdomain& sub);
std::vector<double> restrict_vector(const std::vector<double>& x, int nlon, int nlat,
                                    const SpaceSubdomain& sub);

/// Partition-of-unity assembly: every global cell gets the average of all
/// local values covering it (weight 1/cover-count).
StateVector extend_and_sum(const std::vector<StateVector>& locals, const DomainDecomposition& dd);

/// Quadratic trace-mismatch penalty over the halo cells:
/// mu * sum (x_local - trace)^2, gradient 2*mu*(x_local - trace) there.
/// `trace` has local layout; only halo columns contribute.
double overlap_penalty(const StateVector& x_local, const StateVector& trace,
                       const SpaceSubdomain& sub, double mu, StateVector* grad = nullptr);

struct DDOptions {
  MinimizeOptions inner;
  int max_sweeps = 10;
  double sweep_tol = 1e-8;  // relative change of the assembled iterate
  // Per-subdomain iteration log: (sweep, subdomain index, record).
  std::function<void(int, int, const IterRecord&)> log;
};

/// Additive-Schwarz outer iteration over local 4D-Var solves. Per sweep:
/// every subdomain minimizes its restricted functional (local background
/// covariance rebuilt from the restricted x_b, halo/exterior model values
/// frozen from the current assembly's trajectory, overlap penalty against
/// the current assembly), then extend_and_sum re-assembles. Sweeps stop when
/// the assembled iterate changes by < sweep_tol (relative) or after
/// max_sweeps. With one subdomain this reduces to the global minimize.
DAResult solve_dd(const AssimilationSetup& setup, const DomainDecomposition& dd,
                  const DDOptions& opts = DDOptions{});

/// Local functional value for one subdomain at a given local point, with the
/// exterior model values frozen from `reference`'s trajectory (used by the
/// additivity checks; mu = 0 skips the trace penalty).
double local_cost(const AssimilationSetup& setup, const DomainDecomposition& dd, int ispace,
                  int itime, const StateVector& x_local, const StateVector& reference);

}  // namespace sw4dvar
