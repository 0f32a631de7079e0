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

#ifndef RMFMM_MM_HPP_
#define RMFMM_MM_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmfmm/error.hpp"
#include "rmfmm/ladmpsap.hpp"
#include "rmfmm/model.hpp"
#include "rmfmm/types.hpp"

namespace rmfmm {

enum class MmMode {
  // rho fixed at its bound: the surrogate majorizes F everywhere.
  kGloballyMajorant,
  // rho starts small and is doubled until F(x_{k+1}) <= G_k(x_{k+1}).
  kLocallyMajorant,
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double step_norm_sq = 0.0;  // ||x_{k-1} - x_k||^2, 0 for the initial row
  double surrogate = 0.0;     // G_{k-1}(x_k); equals objective on row 0
  double rho_u = 0.0;
  double rho_v = 0.0;
  int inner_iterations = 0;
  int rho_increases = 0;
  double elapsed_ms = 0.0;
};

struct DescentTrace {
  std::vector<TraceEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const TraceEntry& back() const { return entries.back(); }
};

enum class MmStatus {
  kConverged,      // relative objective change below tol
  kMaxIterations,  // max_outer reached
};

struct MmResult {
  FactorPair factors;
  DescentTrace trace;
  MmStatus status = MmStatus::kConverged;
};

/// Raised when the objective or surrogate becomes NaN/Inf; carries the trace
/// recorded up to that point.
class NonFiniteObjectiveError : public Error {
 public:
  NonFiniteObjectiveError(const std::string& what, DescentTrace trace)
      : Error(ErrorKind::kNonFiniteObjective, what),
        trace_(std::move(trace)) {}
  const DescentTrace& trace() const { return trace_; }

 private:
  DescentTrace trace_;
};

struct MmOptions {
  MmMode mode = MmMode::kLocallyMajorant;
  double tol = 1e-4;
  int max_outer = 500;
  double epsilon_margin = kDefaultEpsilonMargin;
  // Locally majorant schedule: rho_0 = max(fraction * rho_bar, floor),
  // multiplied by growth on every rejected step, capped at rho_bar.
  double rho_init_fraction = 1e-2;
  double rho_floor = 1e-3;
  double rho_growth = 2.0;
  // Acceptance slack, relative to |F(x_0)|.
  double slack_fraction = 1e-10;
  std::optional<ladmpsap::InnerConfig> inner;
  // Invoked for every recorded row (including row 0) with the iterate.
  std::function<void(const TraceEntry&, const FactorPair&)> observer;
};

/// Relaxed MM for either RMF variant: at every outer iteration the convex
/// surrogate G_k is minimized by LADMPSAP from a warm start; the step is
/// accepted when F(x_{k+1}) <= G_k(x_{k+1}) and F(x_{k+1}) <= F(x_k), both
/// up to slack_fraction * |F(x_0)|. In locally majorant mode a rejected step
/// doubles (rho_u, rho_v) and re-solves; when no larger rho is available the
/// step is discarded and the run stops as converged at x_k.
inline MmResult RunMm(const RmfProblem& problem, const MaskedMatrix& data,
                      const FactorPair& init, const MmOptions& opts = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&start]() {
    return std::chrono::duration<double, std::milli>(Clock::now() - start)
        .count();
  };

  problem.Validate();
  RequireConsistent(problem, data, init);
  if (!(opts.tol > 0.0) || opts.max_outer < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "tol must be > 0 and max_outer >= 1");
  }
  if (!init.IsFinite()) {
    throw Error(ErrorKind::kNonFinite, "initial factors are not finite");
  }
  if (problem.nonnegative() && !init.IsNonnegative()) {
    throw Error(ErrorKind::kInfeasibleInit,
                "nonnegative model initialized with negative entries");
  }
  const ladmpsap::InnerConfig config =
      opts.inner.value_or(ladmpsap::InnerConfig::Defaults(problem.variant));
  config.Validate();

  SurrogateParams params = SurrogateParams::Global(data.mask(),
                                                   opts.epsilon_margin);
  if (opts.mode == MmMode::kLocallyMajorant) {
    params.rho_u = std::min(
        params.rho_u_bar,
        std::max(opts.rho_init_fraction * params.rho_u_bar, opts.rho_floor));
    params.rho_v = std::min(
        params.rho_v_bar,
        std::max(opts.rho_init_fraction * params.rho_v_bar, opts.rho_floor));
  }

  MmResult result;
  result.factors = init;
  FactorPair& x = result.factors;
  DescentTrace& trace = result.trace;

  double f = Objective(problem, data, x);
  if (!std::isfinite(f)) {
    throw NonFiniteObjectiveError("initial objective is not finite", trace);
  }
  const double slack = opts.slack_fraction * std::abs(f);
  auto record = [&](TraceEntry entry) {
    entry.elapsed_ms = elapsed_ms();
    trace.entries.push_back(entry);
    if (opts.observer) opts.observer(trace.entries.back(), x);
  };
  record({0, f, 0.0, f, params.rho_u, params.rho_v, 0, 0, 0.0});

  const double beta0 = config.InitialBeta(data.rows(), data.cols());
  ladmpsap::InnerState warm = ladmpsap::InnerState::ColdStart(
      BuildInnerProblem(problem, data, x, params), beta0);

  result.status = MmStatus::kMaxIterations;
  for (int k = 1; k <= opts.max_outer; ++k) {
    InnerProblem inner = BuildInnerProblem(problem, data, x, params);
    warm.beta = beta0;
    int attempts = 0;
    bool accepted = false;
    FactorPair inc;
    double f_next = 0.0;
    double g_next = 0.0;
    int inner_iters = 0;
    for (;;) {
      ladmpsap::InnerResult solved =
          ladmpsap::SolveInner(inner, warm, config);
      inner_iters += solved.iterations;
      inc = {solved.state.dU, solved.state.dV};
      f_next = IncrementObjective(problem, data, x, inc);
      g_next = SurrogateValue(problem, data, x, inc, params);
      if (!std::isfinite(f_next) || !std::isfinite(g_next)) {
        throw NonFiniteObjectiveError(
            "objective became non-finite at outer iteration " +
                std::to_string(k),
            trace);
      }
      const bool majorized = f_next <= g_next + slack;
      const bool descent = f_next <= f + slack;
      if (majorized && descent) {
        warm = std::move(solved.state);
        accepted = true;
        break;
      }
      if (opts.mode != MmMode::kLocallyMajorant || params.AtBounds()) break;
      params.rho_u = std::min(params.rho_u_bar, opts.rho_growth * params.rho_u);
      params.rho_v = std::min(params.rho_v_bar, opts.rho_growth * params.rho_v);
      ++attempts;
      inner.rho_u = params.rho_u;
      inner.rho_v = params.rho_v;
      // Retry from the latest E and Y with a zero increment.
      warm = std::move(solved.state);
      warm.dU.setZero();
      warm.dV.setZero();
      warm.beta = beta0;
    }
    if (!accepted) {
      // No admissible step: x_k is kept, which is a zero relative change.
      result.status = MmStatus::kConverged;
      break;
    }

    x += inc;
    if (problem.nonnegative()) {
      // dU = max(z, 0) - U_k gives U_k + dU >= 0 in floating point already;
      // this only normalizes -0.0.
      x.U = x.U.cwiseMax(0.0);
      x.V = x.V.cwiseMax(0.0);
    }
    const double rel_change = std::abs(f - f_next) / std::max(std::abs(f), 1.0);
    f = f_next;
    record({k, f, inc.SquaredNorm(), g_next, params.rho_u, params.rho_v,
            inner_iters, attempts, 0.0});
    if (rel_change < opts.tol) {
      result.status = MmStatus::kConverged;
      break;
    }
  }
  return result;
}

/// Largest alpha with f(x_{k}) - f(x_{k+1}) >= alpha ||x_k - x_{k+1}||^2
/// over consecutive trace rows with a nonzero step; +inf when every step is
/// zero.
inline double CheckSufficientDescent(const DescentTrace& trace) {
  if (trace.size() < 2) {
    throw Error(ErrorKind::kEmptyTrace,
                "sufficient descent needs at least two trace rows");
  }
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double step = trace.entries[i].step_norm_sq;
    if (step > 0.0) {
      alpha = std::min(alpha, (trace.entries[i - 1].objective -
                               trace.entries[i].objective) /
                                  step);
    }
  }
  return alpha;
}

/// Default forward-difference grid for directional derivatives.
inline std::vector<double> DefaultThetaGrid() {
  return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

/// max over directions d of |f'(x; d) - g'(x; d)|, each directional
/// derivative approximated by the smallest forward difference
/// (h(x + t d) - h(x)) / t over theta_grid. Point needs `+` and scalar `*`.
template <class Point, class F, class G,
          class Feasible = bool (*)(const Point&)>
double CheckAsymptoticSmoothness(
    F&& f_eval, G&& g_eval, const Point& anchor,
    std::span<const Point> directions, std::span<const double> theta_grid,
    Feasible&& feasible = [](const Point&) { return true; }) {
  if (theta_grid.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "empty theta grid");
  }
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > 0.0) ||
        (i > 0 && !(theta_grid[i] < theta_grid[i - 1]))) {
      throw Error(ErrorKind::kInvalidArgument,
                  "theta grid must be positive and strictly decreasing");
    }
  }
  const double f0 = f_eval(anchor);
  const double g0 = g_eval(anchor);
  double gap = 0.0;
  for (const Point& d : directions) {
    if (!feasible(anchor + d)) {
      throw Error(ErrorKind::kInfeasibleDirection,
                  "anchor + direction leaves the feasible set");
    }
    double df = std::numeric_limits<double>::infinity();
    double dg = std::numeric_limits<double>::infinity();
    for (const double t : theta_grid) {
      const Point p = anchor + t * d;
      df = std::min(df, (f_eval(p) - f0) / t);
      dg = std::min(dg, (g_eval(p) - g0) / t);
    }
    gap = std::max(gap, std::abs(df - dg));
  }
  return gap;
}

/// Result of sampling the two-sided bound
///   g_hat(x) + gamma_u ||x - x_k||^2 >= f(x) >= g_hat(x) - gamma_l ||x - x_k||^2
/// at points within epsilon_radius of the anchor.
struct MajorizationCertificate {
  double gamma_u = 0.0;
  double gamma_l = 0.0;
  double epsilon_radius = 0.0;
  bool holds = false;
  std::size_t samples_checked = 0;
  double worst_upper_violation = 0.0;
  double worst_lower_violation = 0.0;
};

/// Evaluates the bound at anchor + offset for every offset, rescaling
/// offsets longer than epsilon_radius onto the sphere of that radius.
template <class Point, class F, class GHat>
MajorizationCertificate CertifyMajorization(F&& f_eval, GHat&& ghat_eval,
                                            const Point& anchor,
                                            std::span<const Point> offsets,
                                            double gamma_u, double gamma_l,
                                            double epsilon_radius,
                                            double slack = 0.0) {
  if (!(gamma_u >= 0.0) || !(gamma_l >= 0.0) || !(epsilon_radius > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "gamma_u, gamma_l >= 0 and epsilon_radius > 0 required");
  }
  MajorizationCertificate cert{gamma_u, gamma_l, epsilon_radius, true, 0, 0.0,
                               0.0};
  for (const Point& offset : offsets) {
    const double norm_sq = SquaredNorm(offset);
    const double scale =
        norm_sq > epsilon_radius * epsilon_radius
            ? epsilon_radius / std::sqrt(norm_sq)
            : 1.0;
    const Point d = scale * offset;
    const double dist_sq = scale * scale * norm_sq;
    const Point p = anchor + d;
    const double fv = f_eval(p);
    const double gv = ghat_eval(p);
    const double upper = fv - (gv + gamma_u * dist_sq);
    const double lower = (gv - gamma_l * dist_sq) - fv;
    cert.worst_upper_violation = std::max(cert.worst_upper_violation, upper);
    cert.worst_lower_violation = std::max(cert.worst_lower_violation, lower);
    if (upper > slack || lower > slack) cert.holds = false;
    ++cert.samples_checked;
  }
  return cert;
}

}  // namespace rmfmm

#endif  // RMFMM_MM_HPP_
