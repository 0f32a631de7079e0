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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <tuple>

#include "oracles.hpp"
#include "rmfmm/ladmpsap.hpp"
#include "test_util.hpp"

namespace rmfmm::ladmpsap {
namespace {

using rmfmm::testing::GridArgmin;
using rmfmm::testing::RandomInstance;

DenseMatrix M1(double v) { return DenseMatrix::Constant(1, 1, v); }

InnerProblem SmallInner(Variant v, std::uint64_t seed, double observed = 1.0) {
  const auto inst = RandomInstance(v, 3, 3, 2, observed, seed);
  return BuildInnerProblem(inst.problem, inst.data, inst.anchor,
                           SurrogateParams::Global(inst.data.mask(),
                                                   kDefaultEpsilonMargin));
}

TEST(UpdateE, ObservedEntryBelowThresholdIsZeroed) {
  // E - Y_hat / sigma = 0.3 with 1 / sigma = 0.5.
  const DenseMatrix out = UpdateE(M1(0.3), M1(0.0), M1(1.0), 2.0);
  EXPECT_EQ(out(0, 0), 0.0);
}

TEST(UpdateE, UnobservedEntryPassesThrough) {
  const DenseMatrix out = UpdateE(M1(1.0), M1(1.4), M1(0.0), 2.0);
  EXPECT_DOUBLE_EQ(out(0, 0), 1.0 - 0.7);
}

TEST(UpdateE, ObservedEntryIsShrunk) {
  const DenseMatrix out = UpdateE(M1(-2.0), M1(0.0), M1(1.0), 2.0);
  EXPECT_DOUBLE_EQ(out(0, 0), -1.5);
}

TEST(UpdateE, MatchesGridOracle) {
  Rng rng(11);
  const DenseMatrix e = rmfmm::testing::Gaussian(rng, 4, 5);
  const DenseMatrix y = rmfmm::testing::Gaussian(rng, 4, 5, 3.0);
  const DenseMatrix w = rmfmm::testing::RandomMask(rng, 4, 5, 0.5);
  const double sigma = 1.7;
  const DenseMatrix out = UpdateE(e, y, w, sigma);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 5; ++j) {
      // argmin_x W|x| + <Y_hat, x> + sigma/2 (x - E)^2
      const auto f = [&](double x) {
        return w(i, j) * std::abs(x) + y(i, j) * x +
               0.5 * sigma * (x - e(i, j)) * (x - e(i, j));
      };
      EXPECT_NEAR(out(i, j), GridArgmin(f, -20.0, 20.0), 1e-6);
    }
  }
}

TEST(UpdateDU, ZeroAtStationaryPoint) {
  const DenseMatrix du = UpdateDU(Variant::kLowRankRecovery, M1(0.0),
                                  M1(0.0), M1(2.0), 1.0, 1.0, 0.0);
  EXPECT_EQ(du(0, 0), 0.0);
}

TEST(UpdateDU, ScalarClosedForm) {
  const DenseMatrix du = UpdateDU(Variant::kLowRankRecovery, M1(0.0),
                                  M1(2.0), M1(1.0), 2.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(du(0, 0), -0.75);
}

TEST(UpdateDU, LowRankGradientVanishes) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix du_i = rmfmm::testing::Gaussian(rng, 6, 3);
    const DenseMatrix yv = rmfmm::testing::Gaussian(rng, 6, 3, 5.0);
    const DenseMatrix uk = rmfmm::testing::Gaussian(rng, 6, 3);
    const double sigma = rng.Uniform(0.1, 10.0);
    const double rho = rng.Uniform(0.0, 5.0);
    const double lambda = rng.Uniform(0.0, 2.0);
    const DenseMatrix du = UpdateDU(Variant::kLowRankRecovery, du_i, yv, uk,
                                    sigma, rho, lambda);
    const DenseMatrix grad =
        lambda * (uk + du) + rho * du + sigma * (du - du_i) + yv;
    EXPECT_LE(grad.norm(), 1e-10);
  }
}

TEST(UpdateDU, NonnegativeMatchesGridOracleAndIsFeasible) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix du_i = rmfmm::testing::Gaussian(rng, 4, 2);
    const DenseMatrix yv = rmfmm::testing::Gaussian(rng, 4, 2, 4.0);
    const DenseMatrix uk = rmfmm::testing::Uniform(rng, 4, 2);
    const double sigma = rng.Uniform(0.1, 5.0);
    const double rho = rng.Uniform(0.0, 3.0);
    const double lambda = rng.Uniform(0.0, 2.0);
    const DenseMatrix du =
        UpdateDU(Variant::kRobustNmf, du_i, yv, uk, sigma, rho, lambda);
    EXPECT_TRUE(((uk + du).array() >= 0.0).all());
    for (Index i = 0; i < du.rows(); ++i) {
      for (Index k = 0; k < du.cols(); ++k) {
        const auto f = [&](double d) {
          return 0.5 * lambda * (uk(i, k) + d) * (uk(i, k) + d) +
                 0.5 * rho * d * d + yv(i, k) * d +
                 0.5 * sigma * (d - du_i(i, k)) * (d - du_i(i, k));
        };
        EXPECT_NEAR(du(i, k), GridArgmin(f, -uk(i, k), 50.0), 1e-6);
      }
    }
  }
}

TEST(UpdateDV, ZeroAtStationaryPoint) {
  const DenseMatrix dv = UpdateDV(Variant::kLowRankRecovery, M1(0.0),
                                  M1(0.0), M1(2.0), 1.0, 1.0, 0.0);
  EXPECT_EQ(dv(0, 0), 0.0);
}

TEST(UpdateDV, NonnegativeThresholdDrivesEntryToZero) {
  const DenseMatrix dv =
      UpdateDV(Variant::kRobustNmf, M1(0.0), M1(0.0), M1(1.0), 1.0, 1.0, 4.0);
  EXPECT_DOUBLE_EQ(dv(0, 0), -1.0);
}

TEST(UpdateDV, LowRankGradientVanishes) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix dv_i = rmfmm::testing::Gaussian(rng, 5, 3);
    const DenseMatrix yu = rmfmm::testing::Gaussian(rng, 5, 3, 5.0);
    const DenseMatrix vk = rmfmm::testing::Gaussian(rng, 5, 3);
    const double sigma = rng.Uniform(0.1, 10.0);
    const double rho = rng.Uniform(0.0, 5.0);
    const double lambda = rng.Uniform(0.0, 2.0);
    const DenseMatrix dv = UpdateDV(Variant::kLowRankRecovery, dv_i, yu, vk,
                                    sigma, rho, lambda);
    const DenseMatrix grad =
        lambda * (vk + dv) + rho * dv + sigma * (dv - dv_i) + yu;
    EXPECT_LE(grad.norm(), 1e-10);
  }
}

TEST(UpdateDV, NonnegativeMatchesGridOracleAndIsFeasible) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix dv_i = rmfmm::testing::Gaussian(rng, 4, 2);
    const DenseMatrix yu = rmfmm::testing::Gaussian(rng, 4, 2, 4.0);
    const DenseMatrix vk = rmfmm::testing::Uniform(rng, 4, 2);
    const double sigma = rng.Uniform(0.1, 5.0);
    const double rho = rng.Uniform(0.0, 3.0);
    const double lambda = rng.Uniform(0.0, 4.0);
    const DenseMatrix dv =
        UpdateDV(Variant::kRobustNmf, dv_i, yu, vk, sigma, rho, lambda);
    EXPECT_TRUE(((vk + dv).array() >= 0.0).all());
    for (Index j = 0; j < dv.rows(); ++j) {
      for (Index k = 0; k < dv.cols(); ++k) {
        const auto f = [&](double d) {
          return lambda * std::abs(vk(j, k) + d) + 0.5 * rho * d * d +
                 yu(j, k) * d +
                 0.5 * sigma * (d - dv_i(j, k)) * (d - dv_i(j, k));
        };
        EXPECT_NEAR(dv(j, k), GridArgmin(f, -vk(j, k), 50.0), 1e-6);
      }
    }
  }
}

TEST(UpdateMultiplierAndBeta, NoChangeGrowsBeta) {
  InnerState s{M1(0), M1(0), M1(0), M1(0), 2.0};
  InnerConfig c;
  c.rho0 = 1.5;
  UpdateMultiplierAndBeta(s, c, M1(0.0), 0.0);
  EXPECT_DOUBLE_EQ(s.beta, 3.0);
}

TEST(UpdateMultiplierAndBeta, LargeChangeKeepsBeta) {
  InnerState s{M1(0), M1(0), M1(0), M1(0), 2.0};
  InnerConfig c;
  UpdateMultiplierAndBeta(s, c, M1(0.5), 10.0);
  EXPECT_DOUBLE_EQ(s.beta, 2.0);
  EXPECT_DOUBLE_EQ(s.Y(0, 0), 1.0);  // Y + beta * residual
}

TEST(UpdateMultiplierAndBeta, BetaClampedAtMax) {
  InnerConfig c;
  InnerState s{M1(0), M1(0), M1(0), M1(0), c.beta_max};
  UpdateMultiplierAndBeta(s, c, M1(0.0), 0.0);
  EXPECT_EQ(s.beta, c.beta_max);
}

TEST(ChangeCriterion, UsesLargestWeightedDelta) {
  const StepSizes sizes{4.0, 9.0, 16.0};
  // max(2 * 1, 3 * 1, 4 * 0.5) = 3, times beta 2 over denom 6.
  EXPECT_DOUBLE_EQ(ChangeCriterion(2.0, sizes, 1.0, 1.0, 0.5, 6.0), 1.0);
  EXPECT_DOUBLE_EQ(ChangeCriterion(1.0, sizes, 1e-12, 0, 0, 0.0), 2.0);
}

TEST(CheckStop, FixedPointSatisfiesBoth) {
  const StopFlags f = CheckStop(0.0, 0.0, InnerConfig{});
  EXPECT_TRUE(f.change_small);
  EXPECT_TRUE(f.residual_small);
  EXPECT_TRUE(f.both());
}

TEST(CheckStop, ResidualRatioBelowEps2) {
  InnerConfig c;
  c.eps2 = 1e-4;
  const StopFlags f = CheckStop(1.0, 5e-5, c);
  EXPECT_FALSE(f.change_small);
  EXPECT_TRUE(f.residual_small);
}

TEST(CheckStop, FirstColdIterationIsNotStopped) {
  const InnerProblem inner = SmallInner(Variant::kLowRankRecovery, 1);
  const InnerConfig c = InnerConfig::Defaults(Variant::kLowRankRecovery);
  // Cold start residual is the whole right-hand side: ratio 1 before the
  // first update.
  const InnerState s = InnerState::ColdStart(inner, c.InitialBeta(3, 3));
  const double ratio = ResidualRatio(
      (s.dU * inner.Vk.transpose() + inner.Uk * s.dV.transpose() - inner.rhs)
          .norm(),
      inner.rhs_norm);
  EXPECT_DOUBLE_EQ(ratio, 1.0);
  EXPECT_FALSE(CheckStop(1.0, ratio, c).residual_small);
}

TEST(ResidualRatio, FloorsZeroDenominator) {
  EXPECT_DOUBLE_EQ(ResidualRatio(1e-12, 0.0), 1.0);
}

TEST(StepSizes, UseSpectralNorms) {
  InnerProblem p;
  p.Uk = DenseMatrix::Zero(2, 1);
  p.Uk(0, 0) = 2.0;
  p.Vk = DenseMatrix::Zero(3, 1);
  p.Vk(1, 0) = 3.0;
  const StepSizes s = StepSizes::For(p, 1e-6);
  EXPECT_NEAR(s.eta_e, 3.000001, 1e-15);
  EXPECT_NEAR(s.eta_u, 27.000001, 1e-9);
  EXPECT_NEAR(s.eta_v, 12.000001, 1e-9);
  EXPECT_DOUBLE_EQ(s.sigma_u(2.0), 2.0 * s.eta_u);
}

TEST(InnerConfig, DefaultsPerVariant) {
  const InnerConfig l = InnerConfig::Defaults(Variant::kLowRankRecovery);
  EXPECT_EQ(l.eps1, 1e-5);
  EXPECT_EQ(l.eps2, 1e-4);
  EXPECT_EQ(l.rho0, 1.5);
  EXPECT_EQ(l.beta_max, 1e10);
  EXPECT_EQ(l.max_inner, 500);
  EXPECT_DOUBLE_EQ(l.InitialBeta(200, 300), 500 * 1e-5);
  const InnerConfig n = InnerConfig::Defaults(Variant::kRobustNmf);
  EXPECT_EQ(n.eps1, 1e-4);
  EXPECT_EQ(n.eps2, 1e-4);
  EXPECT_EQ(n.rho0, 3.0);
  InnerConfig bad;
  bad.rho0 = 0.5;
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(SolveInner, ExactFitConvergesImmediately) {
  Rng rng(8);
  const FactorPair truth{rmfmm::testing::Gaussian(rng, 4, 2),
                         rmfmm::testing::Gaussian(rng, 3, 2)};
  const MaskedMatrix data = MaskedMatrix::Full(truth.Product());
  RmfProblem p{Variant::kLowRankRecovery, 2, 0.0, 0.0};
  const InnerProblem inner = BuildInnerProblem(
      p, data, truth, SurrogateParams::Global(data.mask(), 1e-3));
  // M - U V^T is exactly zero only up to rounding in U V^T.
  ASSERT_LE(inner.rhs_norm, 1e-14);
  const InnerConfig c = InnerConfig::Defaults(p.variant);
  InnerResult r = SolveInner(inner, InnerState::ColdStart(inner, 1e-3), c);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
  EXPECT_LE(r.state.dU.norm(), 1e-12);
  EXPECT_LE(r.state.dV.norm(), 1e-12);
}

TEST(SolveInner, ZeroRightHandSideAndZeroStartIsAFixedPoint) {
  InnerProblem p;
  p.Uk = DenseMatrix::Ones(2, 1);
  p.Vk = DenseMatrix::Ones(2, 1);
  p.mask = DenseMatrix::Ones(2, 2);
  p.rhs = DenseMatrix::Zero(2, 2);
  p.rho_u = p.rho_v = 1.0;
  const InnerResult r = SolveInner(p, InnerState::ColdStart(p, 1e-3),
                                   InnerConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.state.dU.norm(), 0.0);
  EXPECT_EQ(r.state.dV.norm(), 0.0);
}

TEST(SolveInner, RejectsShapeMismatchAndBadBeta) {
  const InnerProblem inner = SmallInner(Variant::kLowRankRecovery, 2);
  InnerState s = InnerState::ColdStart(inner, 1e-3);
  s.beta = 0.0;
  EXPECT_THROW(SolveInner(inner, s, InnerConfig{}), Error);
  s = InnerState::ColdStart(inner, 1e-3);
  s.dU = DenseMatrix::Zero(2, 2);
  EXPECT_THROW(SolveInner(inner, s, InnerConfig{}), Error);
}

class OracleEquivalence
    : public ::testing::TestWithParam<std::tuple<Variant, int>> {};

TEST_P(OracleEquivalence, MatchesDualCertifiedMinimum) {
  const auto [variant, seed] = GetParam();
  const InnerProblem inner = SmallInner(variant, 100 + seed, 0.8);
  InnerConfig c = InnerConfig::Defaults(variant);
  // Run to the stopping rule; 500 is a per-outer-step budget.
  c.max_inner = 5000;
  const InnerResult r = SolveInner(
      inner, InnerState::ColdStart(inner, c.InitialBeta(3, 3)), c);
  const auto oracle = rmfmm::testing::OracleFor(inner).Solve();
  const double best = oracle.primal + rmfmm::testing::OracleConstant(inner);
  ASSERT_LE(oracle.gap, 1e-9 * std::max(1.0, std::abs(best)));
  const double got = inner.Value(r.state.dU, r.state.dV);
  EXPECT_LE(std::abs(got - best), 1e-3 * std::abs(best))
      << "solver " << got << " oracle " << best;
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual_ratio, c.eps2);
  if (variant == Variant::kRobustNmf) {
    EXPECT_TRUE(((inner.Uk + r.state.dU).array() >= 0.0).all());
    EXPECT_TRUE(((inner.Vk + r.state.dV).array() >= 0.0).all());
  }
}

INSTANTIATE_TEST_SUITE_P(
    SmallSubproblems, OracleEquivalence,
    ::testing::Combine(::testing::Values(Variant::kLowRankRecovery,
                                         Variant::kRobustNmf),
                       ::testing::Range(0, 10)),
    [](const auto& info) {
      return std::string(std::get<0>(info.param) == Variant::kRobustNmf
                             ? "Nmf"
                             : "Lrr") +
             std::to_string(std::get<1>(info.param));
    });

TEST_P(OracleEquivalence, WarmRestartOnSameSubproblemStopsWithinTwo) {
  const auto [variant, seed] = GetParam();
  const InnerProblem inner = SmallInner(variant, 100 + seed, 0.8);
  InnerConfig c = InnerConfig::Defaults(variant);
  c.max_inner = 5000;
  const InnerResult first = SolveInner(
      inner, InnerState::ColdStart(inner, c.InitialBeta(3, 3)), c);
  ASSERT_TRUE(first.converged);
  const InnerResult again = SolveInner(inner, first.state, c);
  EXPECT_TRUE(again.converged);
  EXPECT_LE(again.iterations, 2);
}

TEST(SolveInner, BetaStaysWithinBounds) {
  const InnerProblem inner = SmallInner(Variant::kLowRankRecovery, 22);
  InnerConfig c = InnerConfig::Defaults(Variant::kLowRankRecovery);
  c.beta_max = 1.0;
  const double beta0 = c.InitialBeta(3, 3);
  const InnerResult r = SolveInner(inner, InnerState::ColdStart(inner, beta0),
                                   c);
  EXPECT_GE(r.state.beta, beta0);
  EXPECT_LE(r.state.beta, c.beta_max);
}

TEST(SolveInner, MaxIterationsReturnsFlaggedIterate) {
  const InnerProblem inner = SmallInner(Variant::kLowRankRecovery, 23);
  InnerConfig c = InnerConfig::Defaults(Variant::kLowRankRecovery);
  c.max_inner = 3;
  const InnerResult r =
      SolveInner(inner, InnerState::ColdStart(inner, 1e-4), c);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_TRUE(r.state.dU.allFinite());
}

TEST(SolveInner, NonFiniteDataIsReported) {
  InnerProblem inner = SmallInner(Variant::kLowRankRecovery, 24);
  inner.rhs(0, 0) = std::numeric_limits<double>::infinity();
  try {
    SolveInner(inner, InnerState::ColdStart(inner, 1e-3), InnerConfig{});
    FAIL() << "expected NonFinite";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
  }
}

}  // namespace
}  // namespace rmfmm::ladmpsap
