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

#ifndef RMFMM_TYPES_HPP_
#define RMFMM_TYPES_HPP_

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "rmfmm/error.hpp"

namespace rmfmm {

using DenseMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline bool AllFinite(const DenseMatrix& a) { return a.allFinite(); }

inline void RequireSameShape(const DenseMatrix& a, const DenseMatrix& b,
                             const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// Observed matrix M together with its 0/1 observation mask W. Values at
// unobserved positions are normalized to 0 on construction and never read.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;

  MaskedMatrix(DenseMatrix values, DenseMatrix mask)
      : values_(std::move(values)), mask_(std::move(mask)) {
    RequireSameShape(values_, mask_, "MaskedMatrix values/mask");
    for (Index j = 0; j < mask_.cols(); ++j) {
      for (Index i = 0; i < mask_.rows(); ++i) {
        const double w = mask_(i, j);
        if (w != 0.0 && w != 1.0) {
          throw Error(ErrorKind::kInvalidArgument,
                      "mask entries must be 0 or 1");
        }
        if (w == 0.0) {
          values_(i, j) = 0.0;
        } else if (!std::isfinite(values_(i, j))) {
          throw Error(ErrorKind::kNonFiniteValue,
                      "observed entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") is not finite");
        }
      }
    }
  }

  // Fully observed matrix.
  static MaskedMatrix Full(DenseMatrix values) {
    DenseMatrix mask = DenseMatrix::Ones(values.rows(), values.cols());
    return MaskedMatrix(std::move(values), std::move(mask));
  }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  const DenseMatrix& values() const { return values_; }
  const DenseMatrix& mask() const { return mask_; }
  Index observed_count() const {
    return static_cast<Index>(mask_.sum());
  }
  bool observed(Index i, Index j) const { return mask_(i, j) != 0.0; }

  friend bool operator==(const MaskedMatrix& a, const MaskedMatrix& b) {
    return a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_ &&
           a.mask_ == b.mask_;
  }

 private:
  DenseMatrix values_;
  DenseMatrix mask_;
};

// Factor iterate (U, V) with U m x r and V n x r; the model is M ~ U V^T.
// Also used for increments (dU, dV) and perturbation directions.
struct FactorPair {
  DenseMatrix U;
  DenseMatrix V;

  Index rank() const { return U.cols(); }

  static FactorPair Zero(Index m, Index n, Index r) {
    return {DenseMatrix::Zero(m, r), DenseMatrix::Zero(n, r)};
  }
  static FactorPair ZeroLike(const FactorPair& other) {
    return Zero(other.U.rows(), other.V.rows(), other.rank());
  }

  DenseMatrix Product() const { return U * V.transpose(); }
  bool IsFinite() const { return U.allFinite() && V.allFinite(); }
  bool IsNonnegative() const {
    return (U.array() >= 0.0).all() && (V.array() >= 0.0).all();
  }
  double SquaredNorm() const { return U.squaredNorm() + V.squaredNorm(); }

  FactorPair& operator+=(const FactorPair& o) {
    U += o.U;
    V += o.V;
    return *this;
  }
  friend FactorPair operator+(FactorPair a, const FactorPair& b) {
    a += b;
    return a;
  }
  friend FactorPair operator-(const FactorPair& a, const FactorPair& b) {
    return {a.U - b.U, a.V - b.V};
  }
  friend FactorPair operator*(double s, const FactorPair& a) {
    return {s * a.U, s * a.V};
  }
  friend bool operator==(const FactorPair& a, const FactorPair& b) {
    return a.U.rows() == b.U.rows() && a.U.cols() == b.U.cols() &&
           a.V.rows() == b.V.rows() && a.V.cols() == b.V.cols() &&
           a.U == b.U && a.V == b.V;
  }
};

inline double SquaredNorm(const FactorPair& p) { return p.SquaredNorm(); }
inline double SquaredNorm(double x) { return x * x; }

}  // namespace rmfmm

#endif  // RMFMM_TYPES_HPP_
