#include "sw4dvar/cost.hpp"

#include <stdexcept>

namespace sw4dvar {

namespace {

// States at the observation times: traj[k] = M^{k*steps_per_obs}(x).
std::vector<StateVector> obs_trajectory(const StateVector& x, const AssimilationSetup& setup) {
  std::vector<StateVector> traj;
  traj.reserve(static_cast<size_t>(setup.nt_obs()));
  ModelParams hop = setup.params;
  hop.msteps = setup.steps_per_obs;
  StateVector cur = x;
  for (int k = 0; k < setup.nt_obs(); ++k) {
    if (k > 0) cur = integrate(cur, setup.grid, hop);
    traj.push_back(cur);
  }
  return traj;
}

// H M^k x - v_k, masked.
std::vector<double> misfit(const StateVector& xk, const std::vector<double>& vk,
                           const ObsOperator& H) {
  std::vector<double> m(xk.data.size());
  for (size_t n = 0; n < m.size(); ++n) m[n] = H.mask[n] * xk.data[n] - vk[n];
  return m;
}

double weighted_sq(const std::vector<double>& m, const ObsErrWeights& w) {
  double s = 0.0;
  for (size_t n = 0; n < m.size(); ++n) s += w.rinv[n] * m[n] * m[n];
  return s;
}

}  // namespace

double eval_cost(const StateVector& x, const AssimilationSetup& setup) {
  if (setup.nt_obs() < 1) throw std::invalid_argument("setup has no observations");
  std::vector<double> d(x.data.size());
  for (size_t n = 0; n < d.size(); ++n) d[n] = x.data[n] - setup.x_b.data[n];
  double j = dot(d, apply_Binv(setup.precon, d));

  const auto traj = obs_trajectory(x, setup);
  for (int k = 0; k < setup.nt_obs(); ++k)
    j += setup.lambda * weighted_sq(misfit(traj[static_cast<size_t>(k)], setup.obs.obs[static_cast<size_t>(k)], setup.H), setup.rinv);
  return j;
}

double eval_cost_grad(const StateVector& x, const AssimilationSetup& setup, StateVector& grad) {
  if (setup.nt_obs() < 1) throw std::invalid_argument("setup has no observations");
  std::vector<double> d(x.data.size());
  for (size_t n = 0; n < d.size(); ++n) d[n] = x.data[n] - setup.x_b.data[n];
  const std::vector<double> bd = apply_Binv(setup.precon, d);
  double j = dot(d, bd);

  grad = StateVector(x.nlon, x.nlat);
  for (size_t n = 0; n < grad.data.size(); ++n) grad.data[n] = 2.0 * bd[n];

  const auto traj = obs_trajectory(x, setup);
  const int total_steps = (setup.nt_obs() - 1) * setup.steps_per_obs;
  const LinearizationPoint lin = linearize(x, setup.grid, setup.params, total_steps);

  // One independent reverse sweep per observation term (O(nt_obs^2) steps).
  for (int k = 0; k < setup.nt_obs(); ++k) {
    const auto m = misfit(traj[static_cast<size_t>(k)], setup.obs.obs[static_cast<size_t>(k)], setup.H);
    j += setup.lambda * weighted_sq(m, setup.rinv);

    StateVector ybar(x.nlon, x.nlat);
    for (size_t n = 0; n < ybar.data.size(); ++n)
      ybar.data[n] = setup.H.mask[n] * setup.rinv.rinv[n] * m[n];

    ybar = adjoint_window(lin, ybar, k * setup.steps_per_obs);
    for (size_t n = 0; n < grad.data.size(); ++n)
      grad.data[n] += 2.0 * setup.lambda * ybar.data[n];
  }
  return j;
}

StateVector eval_grad(const StateVector& x, const AssimilationSetup& setup) {
  StateVector grad;
  eval_cost_grad(x, setup, grad);
  return grad;
}

}  // namespace sw4dvar
