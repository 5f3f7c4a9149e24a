#include "sw4dvar/error_models.hpp"

#include <cmath>
#include <stdexcept>

namespace sw4dvar {

BackgroundCov build_background_cov(const StateVector& x_b) {
  BackgroundCov cov;
  double sum = 0.0;
  for (double x : x_b.data) sum += x;
  cov.nu = sum / static_cast<double>(x_b.data.size());
  cov.err_vector.resize(x_b.data.size());
  for (size_t n = 0; n < x_b.data.size(); ++n) cov.err_vector[n] = x_b.data[n] - cov.nu;
  return cov;
}

TsvdResult tsvd(const BackgroundCov& cov, int nsvs, double rel_tol) {
  if (nsvs < 1) throw std::invalid_argument("tsvd: nsvs must be >= 1");
  TsvdResult res;
  const double e2 = dot(cov.err_vector, cov.err_vector);
  if (e2 == 0.0) {
    res.status = TsvdStatus::DegenerateCovariance;
    return res;
  }
  // Rank-1 spectrum: one exact singular triplet, the rest exact zeros.
  // Requesting more than one value therefore always trips the relative
  // threshold, mirroring the "-" entries of the reference tables.
  if (nsvs > 1) {
    res.status = TsvdStatus::RankDeficient;
    return res;
  }
  res.precon.nsvs = nsvs;
  res.precon.rel_tol = rel_tol;
  res.precon.singular_values.assign(1, e2);
  const double enorm = std::sqrt(e2);
  std::vector<double> u0(cov.err_vector.size());
  for (size_t n = 0; n < u0.size(); ++n) u0[n] = cov.err_vector[n] / enorm;
  res.precon.singular_vectors.push_back(std::move(u0));
  return res;
}

std::vector<double> apply_Binv(const TsvdPrecon& precon, const std::vector<double>& y) {
  if (precon.singular_values.empty()) throw std::invalid_argument("apply_Binv: unusable precon");
  std::vector<double> out(y.size(), 0.0);
  const double s0 = precon.singular_values[0];
  for (size_t k = 0; k < precon.singular_values.size(); ++k) {
    const double sk = precon.singular_values[k];
    if (sk / s0 < precon.rel_tol) continue;
    const double proj = dot(precon.singular_vectors[k], y) / sk;
    axpy(proj, precon.singular_vectors[k], out);
  }
  return out;
}

ObsOperator build_obs_operator(int problem, const SphereGrid& grid) {
  if (problem < 1 || problem > 4) throw std::invalid_argument("unknown problem id");
  ObsOperator H;
  H.mask.assign(static_cast<size_t>(grid.nstate()), 1.0);
  if (problem == 2 || problem == 4) {
    for (size_t i = 0; i < H.mask.size(); ++i) H.mask[i] = (i % 5 == 0) ? 1.0 : 0.0;
  }
  return H;
}

ObsErrWeights build_obs_err_weights(int ncells, int nstate) {
  ObsErrWeights w;
  w.rinv.assign(static_cast<size_t>(nstate), 1.0);
  for (int i = 0; i < ncells; ++i) w.rinv[static_cast<size_t>(i)] = 1e-6;
  return w;
}

ObsErrWeights build_obs_err_weights(const SphereGrid& grid) {
  return build_obs_err_weights(grid.ncells(), grid.nstate());
}

std::vector<double> apply_Rinv(const ObsErrWeights& weights, const std::vector<double>& y) {
  if (weights.rinv.size() != y.size()) throw std::invalid_argument("apply_Rinv: length mismatch");
  std::vector<double> out(y.size());
  for (size_t n = 0; n < y.size(); ++n) out[n] = weights.rinv[n] * y[n];
  return out;
}

}  // namespace sw4dvar
