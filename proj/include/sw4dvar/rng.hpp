#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sw4dvar {

/// Seedable generator with a pinned normal-variate algorithm so that all
/// synthetic data is bit-reproducible across platforms and library versions.
///
/// Uniform doubles come from the top 53 bits of mt19937_64; normal deviates
/// use the basic (trigonometric) Box-Muller transform, one cached spare per
/// pair. std::normal_distribution is deliberately not used: its algorithm is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi] (inclusive), via rejection-free scaling.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  /// Standard normal deviate, Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // Guard the log singularity at u1 == 0.
    while (u1 == 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sw4dvar
