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

#ifndef RMFMM_DATAGEN_HPP_
#define RMFMM_DATAGEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmfmm/error.hpp"
#include "rmfmm/model.hpp"
#include "rmfmm/random.hpp"
#include "rmfmm/types.hpp"

namespace rmfmm {

struct SyntheticSpec {
  Variant kind = Variant::kLowRankRecovery;
  Index m = 200;
  Index n = 200;
  Index r = 5;
  double outlier_fraction = 0.4;
  double outlier_low = -10.0;
  double outlier_high = 10.0;
  double missing_fraction = 0.8;
  double sparsity_fraction = 0.0;  // fraction of V zeroed, NMF only
  std::uint64_t seed = 0;

  /// Gaussian factors, 40% outliers on [-10, 10], 80% missing.
  static SyntheticSpec LowRankRecovery(Index m, Index n, Index r,
                                       std::uint64_t seed) {
    SyntheticSpec s;
    s.kind = Variant::kLowRankRecovery;
    s.m = m;
    s.n = n;
    s.r = r;
    s.seed = seed;
    return s;
  }

  /// Uniform(0,1) factors, 30% of V zeroed, 40% outliers on [0, 10], fully
  /// observed.
  static SyntheticSpec RobustNmf(Index m, Index n, Index r,
                                 std::uint64_t seed) {
    SyntheticSpec s;
    s.kind = Variant::kRobustNmf;
    s.m = m;
    s.n = n;
    s.r = r;
    s.outlier_low = 0.0;
    s.outlier_high = 10.0;
    s.missing_fraction = 0.0;
    s.sparsity_fraction = 0.3;
    s.seed = seed;
    return s;
  }

  void Validate() const {
    if (m <= 0 || n <= 0 || r <= 0) {
      throw Error(ErrorKind::kInvalidArgument, "m, n, r must be positive");
    }
    if (r > std::min(m, n)) {
      throw Error(ErrorKind::kRankTooLarge, "r exceeds min(m, n)");
    }
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(outlier_fraction) || !in_unit(sparsity_fraction) ||
        !(missing_fraction >= 0.0 && missing_fraction < 1.0)) {
      throw Error(ErrorKind::kInvalidFraction,
                  "fractions must lie in [0,1] (missing in [0,1))");
    }
    if (kind != Variant::kRobustNmf && sparsity_fraction != 0.0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "sparsity fraction applies to NMF instances only");
    }
    if (!(outlier_low <= outlier_high) || !std::isfinite(outlier_low) ||
        !std::isfinite(outlier_high)) {
      throw Error(ErrorKind::kInvalidArgument, "invalid outlier range");
    }
  }
};

struct GroundTruthBundle {
  MaskedMatrix data;
  FactorPair truth;
  // Row-major linear indices i * n + j, increasing.
  std::vector<std::uint64_t> outlier_positions;
  std::vector<std::uint64_t> missing_positions;
};

namespace detail {
inline std::uint64_t RoundedCount(double fraction, std::uint64_t total) {
  return static_cast<std::uint64_t>(
      std::llround(fraction * static_cast<double>(total)));
}
}  // namespace detail

/// Draw order from one Rng(seed): U (row-major), V (row-major), V sparsity
/// positions, outlier positions, outlier values (in position order),
/// missing positions. Outliers replace the clean value; outlier and missing
/// positions are drawn independently and may overlap.
inline GroundTruthBundle Generate(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  const Index m = spec.m, n = spec.n, r = spec.r;
  const bool nmf = spec.kind == Variant::kRobustNmf;
  auto draw = [&](Index rows) {
    DenseMatrix a(rows, r);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < r; ++j) {
        a(i, j) = nmf ? rng.Uniform01() : rng.Normal();
      }
    }
    return a;
  };
  GroundTruthBundle out;
  out.truth.U = draw(m);
  out.truth.V = draw(n);
  if (spec.sparsity_fraction > 0.0) {
    const auto total = static_cast<std::uint64_t>(n * r);
    for (const std::uint64_t p : rng.SampleWithoutReplacement(
             total, detail::RoundedCount(spec.sparsity_fraction, total))) {
      out.truth.V(static_cast<Index>(p / r), static_cast<Index>(p % r)) = 0.0;
    }
  }
  DenseMatrix values = out.truth.Product();
  const auto cells = static_cast<std::uint64_t>(m * n);
  out.outlier_positions = rng.SampleWithoutReplacement(
      cells, detail::RoundedCount(spec.outlier_fraction, cells));
  for (const std::uint64_t p : out.outlier_positions) {
    values(static_cast<Index>(p / n), static_cast<Index>(p % n)) =
        rng.Uniform(spec.outlier_low, spec.outlier_high);
  }
  out.missing_positions = rng.SampleWithoutReplacement(
      cells, detail::RoundedCount(spec.missing_fraction, cells));
  DenseMatrix mask = DenseMatrix::Ones(m, n);
  for (const std::uint64_t p : out.missing_positions) {
    mask(static_cast<Index>(p / n), static_cast<Index>(p % n)) = 0.0;
  }
  out.data = MaskedMatrix(std::move(values), std::move(mask));
  return out;
}

/// ||U_est V_est^T - U_0 V_0^T||_1 / (m n).
inline double GroundTruthError(const FactorPair& est, const FactorPair& truth) {
  if (est.U.rows() != truth.U.rows() || est.V.rows() != truth.V.rows() ||
      est.U.cols() != est.V.cols() || truth.U.cols() != truth.V.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "estimate and truth factor shapes differ");
  }
  const double cells =
      static_cast<double>(est.U.rows()) * static_cast<double>(est.V.rows());
  return (est.Product() - truth.Product()).cwiseAbs().sum() / cells;
}

/// ||W.(U_est V_est^T - M)||_1 / #W.
inline double ObservedError(const FactorPair& est, const MaskedMatrix& data) {
  if (est.U.rows() != data.rows() || est.V.rows() != data.cols() ||
      est.U.cols() != est.V.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "factor shapes do not match data");
  }
  const Index count = data.observed_count();
  if (count == 0) {
    throw Error(ErrorKind::kEmptyMask, "data has no observed entries");
  }
  return MaskedL1(data.mask(), est.Product() - data.values()) /
         static_cast<double>(count);
}

/// Seeded nonnegative start: U', V' uniform on [0, 1), returned as
/// c U', c V' with c^2 = mean(observed M) / r, i.e. the product is scaled by
/// mean(M) / r. Draws U row-major, then V row-major.
inline FactorPair NonnegativeRandomInit(const MaskedMatrix& data, Index r,
                                        std::uint64_t seed) {
  if (r <= 0) throw Error(ErrorKind::kInvalidArgument, "rank must be > 0");
  const Index count = data.observed_count();
  if (count == 0) {
    throw Error(ErrorKind::kEmptyMask, "data has no observed entries");
  }
  const double mean = data.values().sum() / static_cast<double>(count);
  const double scale = std::sqrt(std::max(mean, 0.0) / static_cast<double>(r));
  Rng rng(seed);
  FactorPair f = FactorPair::Zero(data.rows(), data.cols(), r);
  for (Index i = 0; i < f.U.rows(); ++i) {
    for (Index j = 0; j < r; ++j) f.U(i, j) = scale * rng.Uniform01();
  }
  for (Index i = 0; i < f.V.rows(); ++i) {
    for (Index j = 0; j < r; ++j) f.V(i, j) = scale * rng.Uniform01();
  }
  return f;
}

}  // namespace rmfmm

#endif  // RMFMM_DATAGEN_HPP_
