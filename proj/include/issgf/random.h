#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "issgf/tensor_core.h"

namespace issgf {

/// Independent generator for the named sub-stream `name` and instance
/// `index` of a run seeded with `seed`. Adding a new stream name never
/// perturbs existing ones.
inline std::mt19937_64 MakeStream(std::uint64_t seed, std::string_view name,
                                  std::uint64_t index = 0) {
  // FNV-1a keeps stream ids stable across standard libraries.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Derives a 64-bit seed for a sub-stream (for APIs that take a seed).
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view name,
                                std::uint64_t index = 0) {
  return MakeStream(seed, name, index)();
}

/// Matrix with i.i.d. U(lo, hi) entries.
inline Matrix UniformMatrix(std::mt19937_64& rng, int rows, int cols,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
/// of R's diagonal folded into Q).
inline Matrix RandomOrthogonal(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal;
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  return q;
}

}  // namespace issgf
