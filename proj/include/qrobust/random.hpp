#pragma once

// Seeded randomness. Engines are std::mt19937_64, whose output sequence is
// fixed by the standard; the uniform and Gaussian transforms are written out
// here so results do not depend on the standard library's distributions.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "qrobust/linalg.hpp"

namespace qrobust {

/// Independent 64-bit seed for stream `stream` of a master seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Haar-distributed N x N unitary: QR of a complex Ginibre matrix with the
/// phases of diag(R) moved into Q.
inline ComplexMatrix haar_random_unitary(int n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("haar_random_unitary: dimension must be >= 1");
  Rng rng(seed);
  ComplexMatrix z(n, n);
  const double scale = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = Complex(re, im) * scale;
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

}  // namespace qrobust
