// Copyright 2026 The rmfmm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RMFMM_KERNELS_HPP_
#define RMFMM_KERNELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "rmfmm/error.hpp"
#include "rmfmm/random.hpp"
#include "rmfmm/types.hpp"

namespace rmfmm {

namespace detail {
inline void RequireNonnegativeGamma(double gamma) {
  if (!(gamma >= 0.0)) {
    throw Error(ErrorKind::kNegativeGamma,
                "shrinkage threshold must be >= 0, got " +
                    std::to_string(gamma));
  }
}
}  // namespace detail

/// Soft thresholding S_gamma(x) = max(|x| - gamma, 0) sgn(x), the proximal
/// map of gamma |.|.
inline double Shrink(double x, double gamma) {
  detail::RequireNonnegativeGamma(gamma);
  const double mag = std::abs(x) - gamma;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

/// Positive shrinkage max(x - gamma, 0): the proximal map of
/// gamma x + indicator(x >= 0).
inline double ShrinkPositive(double x, double gamma) {
  detail::RequireNonnegativeGamma(gamma);
  return std::max(x - gamma, 0.0);
}

inline DenseMatrix Shrink(const DenseMatrix& x, double gamma) {
  detail::RequireNonnegativeGamma(gamma);
  return x.unaryExpr([gamma](double v) { return Shrink(v, gamma); });
}

inline DenseMatrix ShrinkPositive(const DenseMatrix& x, double gamma) {
  detail::RequireNonnegativeGamma(gamma);
  return (x.array() - gamma).cwiseMax(0.0).matrix();
}

/// Sum of |residual| over the entries where mask is 1.
inline double MaskedL1(const DenseMatrix& mask, const DenseMatrix& residual) {
  RequireSameShape(mask, residual, "MaskedL1");
  return mask.cwiseProduct(residual).cwiseAbs().sum();
}

struct PowerIterationOptions {
  double tol = 1e-6;
  int max_iter = 200;
  std::uint64_t seed = 0x5eed5eedULL;
};

/// Largest singular value of a by power iteration on a^T a, starting from a
/// seeded Gaussian vector. Returns 0 for an empty or all-zero matrix.
inline double SpectralNorm(const DenseMatrix& a,
                           const PowerIterationOptions& opts = {}) {
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  if (!(opts.tol > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "power iteration tol must be > 0");
  }
  Rng rng(opts.seed);
  auto random_unit = [&rng, n = a.cols()]() {
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.Normal();
    return Eigen::VectorXd(v / v.norm());
  };

  Eigen::VectorXd x = random_unit();
  Eigen::VectorXd y = a * x;
  if (y.norm() == 0.0) {
    // Start vector in the null space; one restart from fresh noise.
    x = random_unit();
    y = a * x;
    if (y.norm() == 0.0) {
      x += random_unit();
      x.normalize();
      y = a * x;
    }
  }
  double sigma = y.norm();
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::VectorXd z = a.transpose() * y;
    const double zn = z.norm();
    if (zn == 0.0) break;
    x = z / zn;
    y = a * x;
    const double next = y.norm();
    const bool done = std::abs(next - sigma) <= opts.tol * next;
    sigma = next;
    if (done) break;
  }
  return sigma;
}

/// Rank-r factors of a: a ~ U diag(s) V^T with orthonormal columns in U, V.
struct TruncatedSvd {
  DenseMatrix U;
  Eigen::VectorXd singular_values;
  DenseMatrix V;
  int sweeps = 0;
};

struct SubspaceIterationOptions {
  double tol = 1e-8;
  int max_sweeps = 500;
  std::uint64_t seed = 0x51d5eedULL;
};

/// Top-r singular triplets by orthogonal (block power) iteration on a
/// subspace of dimension min(2r, min(m, n)), finished with a Rayleigh-Ritz
/// projection. Converged when ||a V_r - U_r S_r||_F <= tol * s_1.
inline TruncatedSvd ComputeTruncatedSvd(const DenseMatrix& a, Index r,
                                        const SubspaceIterationOptions& opts =
                                            {}) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (r <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "rank must be positive");
  }
  if (r > std::min(m, n)) {
    throw Error(ErrorKind::kRankTooLarge,
                "rank " + std::to_string(r) + " exceeds min(" +
                    std::to_string(m) + "," + std::to_string(n) + ")");
  }
  const Index k = std::min<Index>(2 * r, std::min(m, n));

  auto orthonormalize = [](const DenseMatrix& x) {
    Eigen::HouseholderQR<DenseMatrix> qr(x);
    return DenseMatrix(qr.householderQ() *
                       DenseMatrix::Identity(x.rows(), x.cols()));
  };

  Rng rng(opts.seed);
  DenseMatrix omega(n, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < n; ++i) omega(i, j) = rng.Normal();
  }
  DenseMatrix q = orthonormalize(a * omega);

  TruncatedSvd out;
  for (int sweep = 1;; ++sweep) {
    // Rayleigh-Ritz on the current left subspace.
    const DenseMatrix b = q.transpose() * a;  // k x n
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(b * b.transpose());
    out.U.resize(m, r);
    out.V.resize(n, r);
    out.singular_values.resize(r);
    for (Index j = 0; j < r; ++j) {
      const Eigen::VectorXd w = eig.eigenvectors().col(k - 1 - j);
      Eigen::VectorXd v = b.transpose() * w;
      const double s = v.norm();
      out.U.col(j) = q * w;
      out.singular_values(j) = s;
      out.V.col(j) = s > 0.0 ? Eigen::VectorXd(v / s)
                             : Eigen::VectorXd::Zero(n);
    }
    out.sweeps = sweep;
    const double s1 = out.singular_values(0);
    if (s1 == 0.0) break;
    const double residual =
        (a * out.V - out.U * out.singular_values.asDiagonal()).norm();
    if (residual <= opts.tol * s1 || sweep >= opts.max_sweeps) break;
    q = orthonormalize(a * orthonormalize(a.transpose() * q));
  }
  return out;
}

/// Initial factors from the rank-r truncated SVD of W (.) M, with the
/// singular values split symmetrically: U0 = U_r S^1/2, V0 = V_r S^1/2.
inline FactorPair TruncatedSvdInit(const MaskedMatrix& data, Index r,
                                   std::uint64_t seed = 0x51d5eedULL) {
  SubspaceIterationOptions opts;
  opts.seed = seed;
  // values() is already zero at unobserved entries.
  const TruncatedSvd svd = ComputeTruncatedSvd(data.values(), r, opts);
  const Eigen::VectorXd root = svd.singular_values.cwiseSqrt();
  return {svd.U * root.asDiagonal(), svd.V * root.asDiagonal()};
}

}  // namespace rmfmm

#endif  // RMFMM_KERNELS_HPP_
