#pragma once

#include "linalg.hpp"
#include "nnet.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace hdd::test {

inline Matrix gaussian(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
  }
  return m;
}

inline Vector gaussian_vec(Index n, std::uint64_t seed) { return gaussian(n, 1, seed).col(0); }

inline Matrix random_symmetric(Index n, std::uint64_t seed) {
  const Matrix a = gaussian(n, n, seed);
  return (a + a.transpose()) / 2.0;
}

/// B B^T with B n x r.
inline Matrix random_psd(Index n, Index r, std::uint64_t seed) {
  const Matrix b = gaussian(n, r, seed);
  return b * b.transpose();
}

inline double rel_fro(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

/// Smallest |pre-activation| of any hidden unit over the rows of x; finite
/// differences with steps well below it never cross a ReLU kink.
inline double min_preactivation(const MlpParams& p, const Matrix& x) {
  const auto layers = unflatten(p.spec, p.theta);
  double closest = INFINITY;
  for (Index i = 0; i < x.rows(); ++i) {
    Vector a = x.row(i).transpose();
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      Vector z = layers[l].weight * a;
      if (layers[l].bias.size() > 0) z += layers[l].bias;
      closest = std::min(closest, z.cwiseAbs().minCoeff());
      a = p.spec.activation == Activation::relu ? Vector(z.cwiseMax(0.0)) : z;
    }
  }
  return closest;
}

}  // namespace hdd::test
