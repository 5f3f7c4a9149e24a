#pragma once

#include <stdexcept>
#include <vector>

namespace sw4dvar {

/// Physical constants of the rotating sphere.
struct PhysicalConstants {
  double a = 6.371e6;        // earth radius [m]
  double g = 9.81;           // gravity [m/s^2]
  double omega = 7.292e-5;   // rotation rate [rad/s]
};

/// Lat-lon grid geometry. Latitudes are cell-centered and offset from the
/// poles by dtheta/2, so cos(theta_j) never vanishes. Longitude is periodic,
/// latitude indices clamp to the boundary rows (zero-gradient closure).
/// Immutable after construction.
struct SphereGrid {
  int nlon = 0;
  int nlat = 0;
  double dlambda = 0.0;      // 2*pi/nlon [rad]
  double dtheta = 0.0;       // pi/nlat [rad]
  std::vector<double> theta;   // nlat latitudes, strictly increasing
  std::vector<double> lambda;  // nlon longitudes, lambda_i = i*dlambda
  double a = 0.0;
  double g = 0.0;
  double omega = 0.0;

  int ncells() const { return nlon * nlat; }
  int nstate() const { return 3 * nlon * nlat; }
};

SphereGrid build_grid(int nlon, int nlat,
                      const PhysicalConstants& constants = PhysicalConstants{});

/// Periodic longitude index: i mod nlon mapped into [0, nlon).
inline int wrap_lon(int i, int nlon) {
  int r = i % nlon;
  return r < 0 ? r + nlon : r;
}

/// Clamped latitude index: min(max(j, 0), nlat-1).
inline int clamp_lat(int j, int nlat) {
  return j < 0 ? 0 : (j >= nlat ? nlat - 1 : j);
}

}  // namespace sw4dvar
