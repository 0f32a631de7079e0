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

#ifndef RMFMM_LADMPSAP_HPP_
#define RMFMM_LADMPSAP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmfmm/error.hpp"
#include "rmfmm/kernels.hpp"
#include "rmfmm/model.hpp"
#include "rmfmm/types.hpp"

// Linearized ADM with parallel splitting and adaptive penalty for the
// three-block inner problem (E, dU, dV) built by BuildInnerProblem.

namespace rmfmm::ladmpsap {

/// Floor for ||M - U_k V_k^T||_F in the relative tests.
inline constexpr double kDenominatorFloor = 1e-12;

struct InnerState {
  DenseMatrix E;
  DenseMatrix dU;
  DenseMatrix dV;
  DenseMatrix Y;
  double beta = 0.0;

  /// E = M - U_k V_k^T, dU = dV = 0, Y = 0.
  static InnerState ColdStart(const InnerProblem& inner, double beta0) {
    return {inner.rhs, DenseMatrix::Zero(inner.rows(), inner.rank()),
            DenseMatrix::Zero(inner.cols(), inner.rank()),
            DenseMatrix::Zero(inner.rows(), inner.cols()), beta0};
  }
};

struct InnerConfig {
  double eps1 = 1e-5;
  double eps2 = 1e-4;
  double rho0 = 1.5;
  double beta_max = 1e10;
  // <= 0 selects (m + n) * eps1.
  double beta0 = 0.0;
  int max_inner = 500;
  // Added to the linearization constants eta.
  double eps_step = 1e-6;

  static InnerConfig Defaults(Variant v) {
    InnerConfig c;
    if (v == Variant::kRobustNmf) {
      c.eps1 = 1e-4;
      c.eps2 = 1e-4;
      c.rho0 = 3.0;
    }
    return c;
  }

  double InitialBeta(Index m, Index n) const {
    return beta0 > 0.0 ? beta0 : static_cast<double>(m + n) * eps1;
  }

  void Validate() const {
    if (!(eps1 > 0.0) || !(eps2 > 0.0) || !(rho0 >= 1.0) ||
        !(beta_max > 0.0) || max_inner < 1 || !(eps_step > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "invalid InnerConfig");
    }
  }
};

/// eta = 3 ||A_j||^2 + eps for the three blocks; sigma_j = eta_j * beta.
struct StepSizes {
  double eta_e = 0.0;
  double eta_u = 0.0;
  double eta_v = 0.0;

  static StepSizes For(const InnerProblem& inner, double eps_step) {
    const double nu = SpectralNorm(inner.Vk);
    const double nv = SpectralNorm(inner.Uk);
    return {3.0 + eps_step, 3.0 * nu * nu + eps_step,
            3.0 * nv * nv + eps_step};
  }

  double sigma_e(double beta) const { return eta_e * beta; }
  double sigma_u(double beta) const { return eta_u * beta; }
  double sigma_v(double beta) const { return eta_v * beta; }
};

/// Y_hat = Y + beta (E + dU V_k^T + U_k dV^T + U_k V_k^T - M).
inline DenseMatrix MultiplierPredictor(const InnerProblem& inner,
                                       const InnerState& s) {
  return s.Y + s.beta * inner.ConstraintResidual(s.E, s.dU, s.dV);
}

/// W.S_{1/sigma_e}(E - Y_hat/sigma_e) + (1-W).(E - Y_hat/sigma_e), written
/// into `out` (which may alias neither input).
inline void UpdateE(const DenseMatrix& e, const DenseMatrix& y_hat,
                    const DenseMatrix& mask, double sigma_e,
                    DenseMatrix& out) {
  RequireSameShape(e, y_hat, "UpdateE E/Y_hat");
  RequireSameShape(e, mask, "UpdateE E/W");
  out.resize(e.rows(), e.cols());
  const double inv_sigma = 1.0 / sigma_e;
  const Index size = e.size();
  const double* pe = e.data();
  const double* py = y_hat.data();
  const double* pw = mask.data();
  double* po = out.data();
  for (Index k = 0; k < size; ++k) {
    const double point = pe[k] - py[k] * inv_sigma;
    if (pw[k] != 0.0) {
      const double mag = std::abs(point) - inv_sigma;
      po[k] = mag > 0.0 ? (point > 0.0 ? mag : -mag) : 0.0;
    } else {
      po[k] = point;
    }
  }
}

inline DenseMatrix UpdateE(const DenseMatrix& e, const DenseMatrix& y_hat,
                           const DenseMatrix& mask, double sigma_e) {
  DenseMatrix out;
  UpdateE(e, y_hat, mask, sigma_e, out);
  return out;
}

/// Exact minimizer over dU of
///   rho_u/2||dU||^2 + lambda_u/2||U_k+dU||^2 + ind(U_k+dU >= 0 for NMF)
///   + sigma_u/2 ||dU - dU_i + Y_hat V_k / sigma_u||^2.
/// yhat_v is Y_hat V_k.
inline DenseMatrix UpdateDU(Variant variant, const DenseMatrix& du_i,
                            const DenseMatrix& yhat_v, const DenseMatrix& uk,
                            double sigma_u, double rho_u, double lambda_u) {
  RequireSameShape(du_i, yhat_v, "UpdateDU dU/Y_hat V");
  RequireSameShape(du_i, uk, "UpdateDU dU/U_k");
  const double denom = lambda_u + sigma_u + rho_u;
  if (variant == Variant::kLowRankRecovery) {
    return (-lambda_u * uk + sigma_u * du_i - yhat_v) / denom;
  }
  const DenseMatrix z = ((sigma_u + rho_u) * uk + sigma_u * du_i - yhat_v) /
                        denom;
  return ShrinkPositive(z, 0.0) - uk;
}

/// Exact minimizer over dV of
///   rho_v/2||dV||^2 + R_v(V_k+dV) + ind(V_k+dV >= 0 for NMF)
///   + sigma_v/2 ||dV - dV_i + Y_hat^T U_k / sigma_v||^2.
/// yhatt_u is Y_hat^T U_k.
inline DenseMatrix UpdateDV(Variant variant, const DenseMatrix& dv_i,
                            const DenseMatrix& yhatt_u, const DenseMatrix& vk,
                            double sigma_v, double rho_v, double lambda_v) {
  RequireSameShape(dv_i, yhatt_u, "UpdateDV dV/Y_hat^T U");
  RequireSameShape(dv_i, vk, "UpdateDV dV/V_k");
  if (variant == Variant::kLowRankRecovery) {
    return (-lambda_v * vk + sigma_v * dv_i - yhatt_u) /
           (lambda_v + sigma_v + rho_v);
  }
  const double w = rho_v + sigma_v;
  const DenseMatrix center = (w * vk + sigma_v * dv_i - yhatt_u) / w;
  return ShrinkPositive(center, lambda_v / w) - vk;
}

/// beta * max(sqrt(eta_j) ||x_j^{i+1} - x_j^i||_F) / ||M - U_k V_k^T||_F;
/// drives both the penalty growth rule and the first stopping test.
inline double ChangeCriterion(double beta, const StepSizes& sizes,
                              double de_norm, double du_norm, double dv_norm,
                              double denom) {
  const double m = std::max({std::sqrt(sizes.eta_e) * de_norm,
                             std::sqrt(sizes.eta_u) * du_norm,
                             std::sqrt(sizes.eta_v) * dv_norm});
  return beta * m / std::max(denom, kDenominatorFloor);
}

/// Y += beta * residual, then beta = min(beta_max, rho beta) with
/// rho = rho0 when the change criterion is below eps1 and 1 otherwise.
inline void UpdateMultiplierAndBeta(InnerState& s, const InnerConfig& config,
                                    const DenseMatrix& residual,
                                    double change_criterion) {
  RequireSameShape(s.Y, residual, "UpdateMultiplierAndBeta");
  s.Y += s.beta * residual;
  const double rho = change_criterion < config.eps1 ? config.rho0 : 1.0;
  s.beta = std::min(config.beta_max, rho * s.beta);
}

struct StopFlags {
  bool change_small = false;    // first test: change criterion < eps1
  bool residual_small = false;  // second test: residual ratio < eps2
  bool both() const { return change_small && residual_small; }
};

inline double ResidualRatio(double residual_norm, double denom) {
  return residual_norm / std::max(denom, kDenominatorFloor);
}

inline StopFlags CheckStop(double change_criterion, double residual_ratio,
                           const InnerConfig& config) {
  return {change_criterion < config.eps1, residual_ratio < config.eps2};
}

struct InnerResult {
  InnerState state;
  int iterations = 0;
  bool converged = false;  // false: max_inner reached, best state returned
  double residual_ratio = 0.0;
};

/// Runs the parallel E / dU / dV updates, multiplier and penalty updates
/// until both stopping tests hold or max_inner iterations have run. On
/// hitting the cap the iterate with the smallest constraint residual is
/// returned and `converged` is false.
inline InnerResult SolveInner(const InnerProblem& inner, InnerState warm,
                              const InnerConfig& config) {
  config.Validate();
  RequireSameShape(warm.E, inner.rhs, "warm E");
  RequireSameShape(warm.Y, inner.rhs, "warm Y");
  RequireSameShape(warm.dU, inner.Uk, "warm dU");
  RequireSameShape(warm.dV, inner.Vk, "warm dV");
  if (!(warm.beta > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "warm beta must be > 0");
  }
  const StepSizes sizes = StepSizes::For(inner, config.eps_step);
  const double denom = inner.rhs_norm;
  const Index m = inner.rows();
  const Index n = inner.cols();

  InnerState s = std::move(warm);
  DenseMatrix residual(m, n);
  auto compute_residual = [&]() {
    residual.noalias() = s.dU * inner.Vk.transpose();
    residual.noalias() += inner.Uk * s.dV.transpose();
    residual += s.E - inner.rhs;
  };
  compute_residual();

  // Best-feasibility fallback among the iterates (the warm start itself is
  // excluded: a cold start is trivially feasible).
  InnerResult best{s, 0, false, std::numeric_limits<double>::infinity()};
  DenseMatrix y_hat(m, n), e_next(m, n);
  DenseMatrix yhat_v(m, inner.rank()), yhatt_u(n, inner.rank());

  for (int it = 1; it <= config.max_inner; ++it) {
    y_hat = s.Y + s.beta * residual;
    yhat_v.noalias() = y_hat * inner.Vk;
    yhatt_u.noalias() = y_hat.transpose() * inner.Uk;

    // The three primal blocks only read the previous iterate.
    UpdateE(s.E, y_hat, inner.mask, sizes.sigma_e(s.beta), e_next);
    DenseMatrix du = UpdateDU(inner.variant, s.dU, yhat_v, inner.Uk,
                              sizes.sigma_u(s.beta), inner.rho_u,
                              inner.lambda_u);
    DenseMatrix dv = UpdateDV(inner.variant, s.dV, yhatt_u, inner.Vk,
                              sizes.sigma_v(s.beta), inner.rho_v,
                              inner.lambda_v);

    const double change =
        ChangeCriterion(s.beta, sizes, (e_next - s.E).norm(),
                        (du - s.dU).norm(), (dv - s.dV).norm(), denom);
    s.E.swap(e_next);
    s.dU = std::move(du);
    s.dV = std::move(dv);
    compute_residual();
    const double ratio = ResidualRatio(residual.norm(), denom);
    if (!std::isfinite(ratio) || !std::isfinite(change)) {
      throw Error(ErrorKind::kNonFinite,
                  "inner iterate became non-finite at iteration " +
                      std::to_string(it));
    }
    const StopFlags stop = CheckStop(change, ratio, config);
    if (stop.both()) {
      return {std::move(s), it, true, ratio};
    }
    UpdateMultiplierAndBeta(s, config, residual, change);

    if (ratio < best.residual_ratio) {
      best.state = s;
      best.iterations = it;
      best.residual_ratio = ratio;
    }
  }
  best.iterations = config.max_inner;
  best.converged = false;
  return best;
}

}  // namespace rmfmm::ladmpsap

#endif  // RMFMM_LADMPSAP_HPP_
