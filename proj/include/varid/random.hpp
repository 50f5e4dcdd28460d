#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "varid/types.hpp"

namespace varid {

// Seeded generator with platform-independent draws. The standard
// distributions are implementation-defined, so conversions from raw 64-bit
// words are done here to keep golden outputs stable across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  cplx complex_normal() { return cplx(normal(), normal()) / std::numbers::sqrt2; }

  /// Uniform on the closed unit disk.
  cplx unit_disk() {
    const double r = std::sqrt(uniform());
    const double phi = 2.0 * std::numbers::pi * uniform();
    return std::polar(r, phi);
  }

  Vector complex_normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = complex_normal();
    return v;
  }

  DenseMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    DenseMatrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = complex_normal();
    return a;
  }

  std::uint64_t next_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace varid
