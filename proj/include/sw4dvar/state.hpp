#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sw4dvar/grid.hpp"

namespace sw4dvar {

/// Concatenated (u, v, h) fields on an nlon x nlat grid.
/// Linearized layout: u-block, v-block, h-block, each row-major with
/// index i + j*nlon.
struct StateVector {
  int nlon = 0;
  int nlat = 0;
  std::vector<double> data;  // size 3*nlon*nlat

  StateVector() = default;
  StateVector(int nlon_, int nlat_)
      : nlon(nlon_), nlat(nlat_), data(static_cast<size_t>(3) * nlon_ * nlat_, 0.0) {}

  int ncells() const { return nlon * nlat; }
  int size() const { return 3 * nlon * nlat; }

  double& u(int i, int j) { return data[static_cast<size_t>(i + j * nlon)]; }
  double& v(int i, int j) { return data[static_cast<size_t>(ncells() + i + j * nlon)]; }
  double& h(int i, int j) { return data[static_cast<size_t>(2 * ncells() + i + j * nlon)]; }
  double u(int i, int j) const { return data[static_cast<size_t>(i + j * nlon)]; }
  double v(int i, int j) const { return data[static_cast<size_t>(ncells() + i + j * nlon)]; }
  double h(int i, int j) const { return data[static_cast<size_t>(2 * ncells() + i + j * nlon)]; }

  bool finite() const {
    for (double x : data)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

// Elementwise helpers used throughout the cost/minimizer code.
double dot(const std::vector<double>& x, const std::vector<double>& y);
double norm2(const std::vector<double>& x);
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);

inline double dot(const StateVector& x, const StateVector& y) { return dot(x.data, y.data); }
inline double norm2(const StateVector& x) { return norm2(x.data); }

}  // namespace sw4dvar
