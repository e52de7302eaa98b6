#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace irisnp {

// Counter-based pseudo-random stream (splitmix64). Identical seed gives an
// identical stream on every run, which the region generator relies on for
// reproducible output files.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  // Uniform direction on the unit sphere in n dimensions.
  Eigen::VectorXd unit_direction(int n) {
    Eigen::VectorXd u(n);
    while (true) {
      for (int i = 0; i < n; ++i) u[i] = gaussian();
      const double norm = u.norm();
      if (norm > 1e-12) return u / norm;
    }
  }

 private:
  std::uint64_t state_;
};

// Worker stream derivation: master seed XOR worker index.
inline RngState worker_rng(std::uint64_t master_seed, std::uint64_t worker) {
  return RngState(master_seed ^ worker);
}

}  // namespace irisnp
