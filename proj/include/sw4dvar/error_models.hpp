#pragma once

#include <vector>

#include "sw4dvar/state.hpp"

namespace sw4dvar {

/// Implicit rank-1 background covariance B = e * e^T, with e = x_b - nu and
/// nu the scalar mean of all background entries (one mean over all three
/// field blocks, as defined).
struct BackgroundCov {
  std::vector<double> err_vector;  // e
  double nu = 0.0;
};

BackgroundCov build_background_cov(const StateVector& x_b);

/// Truncated SVD of B used as the pseudo-inverse preconditioner.
struct TsvdPrecon {
  std::vector<double> singular_values;           // descending
  std::vector<std::vector<double>> singular_vectors;  // orthonormal columns
  int nsvs = 0;
  double rel_tol = 1e-14;
};

enum class TsvdStatus { Ok, RankDeficient, DegenerateCovariance };

/// Outcome of the TSVD construction. Requesting singular values past the
/// numerical rank is a reportable failure, not an exception: the harness
/// renders it as the "-" table entry.
struct TsvdResult {
  TsvdStatus status = TsvdStatus::Ok;
  TsvdPrecon precon;

  bool ok() const { return status == TsvdStatus::Ok; }
};

/// B is rank 1 by construction, so the decomposition is analytic:
/// S_0 = ||e||^2 with vector e/||e||, trailing values exactly 0. Fails when
/// S_{nSVs-1}/S_0 < rel_tol (i.e. whenever nSVs exceeds the rank) or e = 0.
TsvdResult tsvd(const BackgroundCov& cov, int nsvs, double rel_tol = 1e-14);

/// Pseudo-inverse application on the retained subspace:
/// sum_i u_i (u_i^T y) / S_i over i with S_i/S_0 >= rel_tol.
std::vector<double> apply_Binv(const TsvdPrecon& precon, const std::vector<double>& y);

/// 0/1 diagonal observation operator.
struct ObsOperator {
  std::vector<double> mask;
};

/// Problems 1 and 3 observe everything; Problems 2 and 4 observe every
/// fifth state index (density exactly 20%).
ObsOperator build_obs_operator(int problem, const SphereGrid& grid);

/// Diagonal of R^-1: 1e-6 on the first nlat*nlon indices (the u-block in
/// the (u, v, h) ordering), 1 elsewhere.
struct ObsErrWeights {
  std::vector<double> rinv;
};

ObsErrWeights build_obs_err_weights(const SphereGrid& grid);
ObsErrWeights build_obs_err_weights(int ncells, int nstate);

std::vector<double> apply_Rinv(const ObsErrWeights& weights, const std::vector<double>& y);

}  // namespace sw4dvar
