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

#ifndef RMFMM_MODEL_HPP_
#define RMFMM_MODEL_HPP_

#include <string>
#include <utility>

#include "rmfmm/error.hpp"
#include "rmfmm/kernels.hpp"
#include "rmfmm/types.hpp"

namespace rmfmm {

enum class Variant {
  // ||W.(M - UV^T)||_1 + lu/2 ||U||_F^2 + lv/2 ||V||_F^2, unconstrained.
  kLowRankRecovery,
  // ||W.(M - UV^T)||_1 + lu/2 ||U||_F^2 + lv ||V||_1, with U, V >= 0.
  kRobustNmf,
};

struct RmfProblem {
  Variant variant = Variant::kLowRankRecovery;
  Index rank = 1;
  double lambda_u = 0.0;
  double lambda_v = 0.0;

  bool nonnegative() const { return variant == Variant::kRobustNmf; }

  void Validate() const {
    if (rank <= 0) {
      throw Error(ErrorKind::kInvalidArgument, "rank must be positive");
    }
    if (!(lambda_u >= 0.0) || !(lambda_v >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "regularization weights must be >= 0");
    }
  }
};

inline double RegularizerU(const RmfProblem& p, const DenseMatrix& u) {
  return 0.5 * p.lambda_u * u.squaredNorm();
}

inline double RegularizerV(const RmfProblem& p, const DenseMatrix& v) {
  if (p.variant == Variant::kRobustNmf) {
    return p.lambda_v * v.cwiseAbs().sum();
  }
  return 0.5 * p.lambda_v * v.squaredNorm();
}

/// Shape checks of factors against data and problem rank.
inline void RequireConsistent(const RmfProblem& p, const MaskedMatrix& data,
                              const FactorPair& f) {
  if (f.U.rows() != data.rows() || f.V.rows() != data.cols() ||
      f.U.cols() != f.V.cols() || f.U.cols() != p.rank) {
    throw Error(ErrorKind::kDimensionMismatch,
                "factors U " + std::to_string(f.U.rows()) + "x" +
                    std::to_string(f.U.cols()) + ", V " +
                    std::to_string(f.V.rows()) + "x" +
                    std::to_string(f.V.cols()) + " do not match data " +
                    std::to_string(data.rows()) + "x" +
                    std::to_string(data.cols()) + " at rank " +
                    std::to_string(p.rank));
  }
}

/// F(U, V) = ||W.(M - UV^T)||_1 + R_u(U) + R_v(V). Constraint violations are
/// reported, not ignored.
inline double Objective(const RmfProblem& p, const MaskedMatrix& data,
                        const FactorPair& f) {
  RequireConsistent(p, data, f);
  if (p.nonnegative() && !f.IsNonnegative()) {
    throw Error(ErrorKind::kInfeasibleFactors,
                "nonnegative model given negative factor entries");
  }
  return MaskedL1(data.mask(), data.values() - f.Product()) +
         RegularizerU(p, f.U) + RegularizerV(p, f.V);
}

/// F_k(dU, dV) = F(U_k + dU, V_k + dV) evaluated by formula; the constraint
/// set is not enforced here so that sampled increments can leave it.
inline double IncrementObjective(const RmfProblem& p, const MaskedMatrix& data,
                                 const FactorPair& anchor,
                                 const FactorPair& inc) {
  RequireConsistent(p, data, anchor);
  RequireSameShape(anchor.U, inc.U, "increment dU");
  RequireSameShape(anchor.V, inc.V, "increment dV");
  const FactorPair x = anchor + inc;
  return MaskedL1(data.mask(), data.values() - x.Product()) +
         RegularizerU(p, x.U) + RegularizerV(p, x.V);
}

/// (rho_u_bar, rho_v_bar): the largest per-row and per-column observation
/// counts of the mask, each plus epsilon_margin. Row counts bound the dU
/// term, column counts the dV term.
inline std::pair<double, double> RhoBounds(const DenseMatrix& mask,
                                           double epsilon_margin) {
  if (!(epsilon_margin > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon_margin must be > 0");
  }
  if (mask.size() == 0 || mask.sum() == 0.0) {
    throw Error(ErrorKind::kEmptyMask, "mask has no observed entries");
  }
  return {mask.rowwise().sum().maxCoeff() + epsilon_margin,
          mask.colwise().sum().maxCoeff() + epsilon_margin};
}

inline constexpr double kDefaultEpsilonMargin = 1e-3;

struct SurrogateParams {
  double rho_u = 0.0;
  double rho_v = 0.0;
  double rho_u_bar = 0.0;
  double rho_v_bar = 0.0;
  double epsilon_margin = kDefaultEpsilonMargin;

  /// Both proximal weights at their bounds: the surrogate majorizes F_k
  /// everywhere.
  static SurrogateParams Global(const DenseMatrix& mask,
                                double epsilon_margin =
                                    kDefaultEpsilonMargin) {
    const auto [ub, vb] = RhoBounds(mask, epsilon_margin);
    return {ub, vb, ub, vb, epsilon_margin};
  }

  bool AtBounds() const { return rho_u >= rho_u_bar && rho_v >= rho_v_bar; }
};

/// G_k without the proximal terms:
/// ||W.(M - U_k V_k^T - dU V_k^T - U_k dV^T)||_1 + R_u(U_k+dU) + R_v(V_k+dV).
inline double SurrogateCore(const RmfProblem& p, const MaskedMatrix& data,
                            const FactorPair& anchor, const FactorPair& inc) {
  RequireConsistent(p, data, anchor);
  RequireSameShape(anchor.U, inc.U, "increment dU");
  RequireSameShape(anchor.V, inc.V, "increment dV");
  const DenseMatrix residual =
      data.values() - anchor.U * anchor.V.transpose() -
      inc.U * anchor.V.transpose() - anchor.U * inc.V.transpose();
  return MaskedL1(data.mask(), residual) + RegularizerU(p, anchor.U + inc.U) +
         RegularizerV(p, anchor.V + inc.V);
}

/// G_k(dU, dV) = SurrogateCore + rho_u/2 ||dU||^2 + rho_v/2 ||dV||^2.
inline double SurrogateValue(const RmfProblem& p, const MaskedMatrix& data,
                             const FactorPair& anchor, const FactorPair& inc,
                             const SurrogateParams& params) {
  return SurrogateCore(p, data, anchor, inc) +
         0.5 * params.rho_u * inc.U.squaredNorm() +
         0.5 * params.rho_v * inc.V.squaredNorm();
}

/// The convex subproblem handed to the inner solver:
///   min ||W.E||_1 + (rho_u/2||dU||^2 + R_u(U_k+dU) + ind_Cu(U_k+dU))
///               + (rho_v/2||dV||^2 + R_v(V_k+dV) + ind_Cv(V_k+dV))
///   s.t. E + dU V_k^T + U_k dV^T = M - U_k V_k^T   (all entries)
struct InnerProblem {
  Variant variant = Variant::kLowRankRecovery;
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  double rho_u = 0.0;
  double rho_v = 0.0;
  DenseMatrix Uk;
  DenseMatrix Vk;
  DenseMatrix mask;
  DenseMatrix rhs;  // M - U_k V_k^T
  double rhs_norm = 0.0;

  Index rows() const { return rhs.rows(); }
  Index cols() const { return rhs.cols(); }
  Index rank() const { return Uk.cols(); }

  /// E + dU V_k^T + U_k dV^T - rhs.
  DenseMatrix ConstraintResidual(const DenseMatrix& e, const DenseMatrix& du,
                                 const DenseMatrix& dv) const {
    return e + du * Vk.transpose() + Uk * dv.transpose() - rhs;
  }

  /// G_k at (dU, dV) with E eliminated.
  double Value(const DenseMatrix& du, const DenseMatrix& dv) const {
    const DenseMatrix residual =
        rhs - du * Vk.transpose() - Uk * dv.transpose();
    double value = MaskedL1(mask, residual) + 0.5 * rho_u * du.squaredNorm() +
                   0.5 * rho_v * dv.squaredNorm() +
                   0.5 * lambda_u * (Uk + du).squaredNorm();
    if (variant == Variant::kRobustNmf) {
      value += lambda_v * (Vk + dv).cwiseAbs().sum();
    } else {
      value += 0.5 * lambda_v * (Vk + dv).squaredNorm();
    }
    return value;
  }
};

inline InnerProblem BuildInnerProblem(const RmfProblem& p,
                                      const MaskedMatrix& data,
                                      const FactorPair& anchor,
                                      const SurrogateParams& params) {
  RequireConsistent(p, data, anchor);
  if (!(params.rho_u > 0.0) || !(params.rho_v > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "rho_u, rho_v must be > 0");
  }
  InnerProblem inner;
  inner.variant = p.variant;
  inner.lambda_u = p.lambda_u;
  inner.lambda_v = p.lambda_v;
  inner.rho_u = params.rho_u;
  inner.rho_v = params.rho_v;
  inner.Uk = anchor.U;
  inner.Vk = anchor.V;
  inner.mask = data.mask();
  inner.rhs = data.values() - anchor.U * anchor.V.transpose();
  inner.rhs_norm = inner.rhs.norm();
  return inner;
}

}  // namespace rmfmm

#endif  // RMFMM_MODEL_HPP_
