#include "sw4dvar/grid.hpp"

#include <cmath>

#include "sw4dvar/state.hpp"

namespace sw4dvar {

SphereGrid build_grid(int nlon, int nlat, const PhysicalConstants& constants) {
  if (nlon < 3 || nlat < 3) throw std::invalid_argument("build_grid: need nlon >= 3 and nlat >= 3");
  SphereGrid g;
  g.nlon = nlon;
  g.nlat = nlat;
  g.dlambda = 2.0 * M_PI / nlon;
  g.dtheta = M_PI / nlat;
  g.a = constants.a;
  g.g = constants.g;
  g.omega = constants.omega;
  g.theta.resize(nlat);
  for (int j = 0; j < nlat; ++j) g.theta[j] = -0.5 * M_PI + (j + 0.5) * g.dtheta;
  g.lambda.resize(nlon);
  for (int i = 0; i < nlon; ++i) g.lambda[i] = i * g.dlambda;
  return g;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t n = 0; n < x.size(); ++n) s += x[n] * y[n];
  return s;
}

double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (size_t n = 0; n < x.size(); ++n) y[n] += alpha * x[n];
}

}  // namespace sw4dvar
