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

// Subcommands of the rmfmm command-line tool. Each returns the process exit
// code: 0 success, 2 usage error, 3 solver stopped at max iterations,
// 4 I/O or data error.

#ifndef RMFMM_TOOLS_COMMANDS_HPP_
#define RMFMM_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmfmm/rmfmm.hpp"

namespace rmfmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitDataError = 4;

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInvalidFraction:
    case ErrorKind::kRankTooLarge:
      return kExitUsage;
    default:
      return kExitDataError;
  }
}

struct GenerateArgs {
  std::string kind = "lrmr";
  Index m = 200;
  Index n = 200;
  Index rank = 5;
  std::optional<double> outlier_frac;
  std::optional<double> outlier_lo;
  std::optional<double> outlier_hi;
  std::optional<double> missing_frac;
  std::optional<double> sparsity_frac;
  std::uint64_t seed = 0;
  std::string out;
};

struct SolveArgs {
  std::string data;
  std::string variant = "lrmr";
  std::string mm = "lmmm";
  Index rank = 0;
  std::optional<double> lambda_u;
  std::optional<double> lambda_v;
  std::string lambda_preset = "recovery";
  double tol = 1e-4;
  int max_outer = 500;
  std::optional<int> max_inner;
  std::uint64_t seed = 0;
  std::vector<std::string> init;   // U V
  std::vector<std::string> truth;  // U V
  std::string out;
};

struct EvalArgs {
  std::vector<std::string> factors;  // U V
  std::vector<std::string> truth;    // U V
  std::string data;
};

inline std::string Fmt(double v) { return io::detail::FormatNumber(v); }

inline int RunGenerate(const GenerateArgs& a, std::ostream& log) {
  Variant kind;
  if (a.kind == "lrmr") {
    kind = Variant::kLowRankRecovery;
  } else if (a.kind == "nmf") {
    kind = Variant::kRobustNmf;
  } else {
    log << "generate: --kind must be lrmr or nmf\n";
    return kExitUsage;
  }
  if (kind == Variant::kLowRankRecovery && a.sparsity_frac) {
    log << "generate: --sparsity-frac applies to --kind nmf only\n";
    return kExitUsage;
  }
  SyntheticSpec spec = kind == Variant::kRobustNmf
                           ? SyntheticSpec::RobustNmf(a.m, a.n, a.rank, a.seed)
                           : SyntheticSpec::LowRankRecovery(a.m, a.n, a.rank,
                                                            a.seed);
  if (a.outlier_frac) spec.outlier_fraction = *a.outlier_frac;
  if (a.outlier_lo) spec.outlier_low = *a.outlier_lo;
  if (a.outlier_hi) spec.outlier_high = *a.outlier_hi;
  if (a.missing_frac) spec.missing_fraction = *a.missing_frac;
  if (a.sparsity_frac) spec.sparsity_fraction = *a.sparsity_frac;
  try {
    spec.Validate();
  } catch (const Error& e) {
    log << "generate: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const GroundTruthBundle bundle = Generate(spec);
    std::filesystem::create_directories(a.out);
    const std::filesystem::path dir(a.out);
    io::SaveMaskedMatrix((dir / "data.txt").string(), bundle.data);
    io::SaveFactors((dir / "truth_U.txt").string(),
                    (dir / "truth_V.txt").string(), bundle.truth);
    io::SaveManifest(
        (dir / "manifest.txt").string(),
        {{"kind", a.kind},
         {"m", std::to_string(spec.m)},
         {"n", std::to_string(spec.n)},
         {"rank", std::to_string(spec.r)},
         {"outlier_frac", Fmt(spec.outlier_fraction)},
         {"outlier_lo", Fmt(spec.outlier_low)},
         {"outlier_hi", Fmt(spec.outlier_high)},
         {"missing_frac", Fmt(spec.missing_fraction)},
         {"sparsity_frac", Fmt(spec.sparsity_fraction)},
         {"seed", std::to_string(spec.seed)},
         {"rng", "mt19937_64"},
         {"observed", std::to_string(bundle.data.observed_count())},
         {"outliers", std::to_string(bundle.outlier_positions.size())},
         {"data", "data.txt"},
         {"truth_u", "truth_U.txt"},
         {"truth_v", "truth_V.txt"}});
  } catch (const Error& e) {
    log << "generate: " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    log << "generate: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

inline int RunSolve(const SolveArgs& a, std::ostream& log) {
  RmfProblem problem;
  if (a.variant == "lrmr") {
    problem.variant = Variant::kLowRankRecovery;
  } else if (a.variant == "nmf") {
    problem.variant = Variant::kRobustNmf;
  } else {
    log << "solve: --variant must be lrmr or nmf\n";
    return kExitUsage;
  }
  MmOptions opts;
  if (a.mm == "lmmm") {
    opts.mode = MmMode::kLocallyMajorant;
  } else if (a.mm == "gmmm") {
    opts.mode = MmMode::kGloballyMajorant;
  } else {
    log << "solve: --mm must be lmmm or gmmm\n";
    return kExitUsage;
  }
  if (a.lambda_preset != "recovery" && a.lambda_preset != "clustering") {
    log << "solve: --lambda-preset must be recovery or clustering\n";
    return kExitUsage;
  }
  if (a.lambda_preset == "clustering" &&
      problem.variant != Variant::kRobustNmf) {
    log << "solve: --lambda-preset clustering applies to --variant nmf only\n";
    return kExitUsage;
  }
  if (a.rank <= 0 || !(a.tol > 0.0) || a.max_outer < 1 ||
      (a.max_inner && *a.max_inner < 1) ||
      (a.lambda_u && !(*a.lambda_u >= 0.0)) ||
      (a.lambda_v && !(*a.lambda_v >= 0.0))) {
    log << "solve: --rank, --tol, --max-outer, --max-inner must be positive "
           "and lambdas >= 0\n";
    return kExitUsage;
  }
  opts.tol = a.tol;
  opts.max_outer = a.max_outer;
  auto inner = ladmpsap::InnerConfig::Defaults(problem.variant);
  if (a.max_inner) inner.max_inner = *a.max_inner;
  opts.inner = inner;

  try {
    const MaskedMatrix data = io::LoadMaskedMatrix(a.data);
    const double mn = static_cast<double>(data.rows() + data.cols());
    problem.rank = a.rank;
    problem.lambda_u = a.lambda_u.value_or(
        (a.lambda_preset == "clustering" ? 2000.0 : 20.0) / mn);
    problem.lambda_v = a.lambda_v.value_or(20.0 / mn);
    if (problem.variant == Variant::kRobustNmf &&
        (data.values().array() < 0.0).any()) {
      throw Error(ErrorKind::kInfeasibleInit,
                  "nmf requires nonnegative observed data");
    }
    if (a.rank > std::min(data.rows(), data.cols())) {
      log << "solve: --rank exceeds min(m, n)\n";
      return kExitUsage;
    }

    FactorPair init;
    if (!a.init.empty()) {
      init = io::LoadFactors(a.init[0], a.init[1]);
    } else if (problem.variant == Variant::kRobustNmf) {
      init = NonnegativeRandomInit(data, a.rank, a.seed);
    } else {
      init = TruncatedSvdInit(data, a.rank);
    }
    std::optional<FactorPair> truth;
    if (!a.truth.empty()) {
      truth = io::LoadFactors(a.truth[0], a.truth[1]);
      RequireConsistent(problem, data, *truth);
    }

    std::filesystem::create_directories(a.out);
    const std::filesystem::path dir(a.out);
    const std::string trace_path = (dir / "trace.csv").string();
    auto csv = io::detail::OpenOut(trace_path);
    csv << "iter,objective,rel_change,rho_u,rho_v,inner_iters,elapsed_ms";
    if (truth) csv << ",rel_err_truth";
    csv << '\n';
    csv.flush();
    double previous = 0.0;
    opts.observer = [&](const TraceEntry& e, const FactorPair& x) {
      const double rel =
          e.iteration == 0
              ? 0.0
              : std::abs(previous - e.objective) /
                    std::max(std::abs(previous), 1.0);
      previous = e.objective;
      csv << e.iteration << ',' << Fmt(e.objective) << ',' << Fmt(rel) << ','
          << Fmt(e.rho_u) << ',' << Fmt(e.rho_v) << ',' << e.inner_iterations
          << ',' << Fmt(e.elapsed_ms);
      if (truth) csv << ',' << Fmt(GroundTruthError(x, *truth));
      csv << '\n';
      csv.flush();
    };

    const MmResult result = RunMm(problem, data, init, opts);
    io::detail::Finish(csv, trace_path);
    io::SaveFactors((dir / "U.txt").string(), (dir / "V.txt").string(),
                    result.factors);
    log << "solve: " << (result.status == MmStatus::kConverged
                             ? "converged"
                             : "stopped at max outer iterations")
        << " after " << result.trace.size() - 1 << " iterations, objective "
        << Fmt(result.trace.back().objective) << '\n';
    return result.status == MmStatus::kConverged ? kExitOk
                                                 : kExitNotConverged;
  } catch (const Error& e) {
    log << "solve: " << e.what() << '\n';
    return ExitCodeFor(e.kind()) == kExitUsage ? kExitDataError
                                               : ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    log << "solve: " << e.what() << '\n';
    return kExitDataError;
  }
}

inline int RunEval(const EvalArgs& a, std::ostream& out, std::ostream& log) {
  if (a.truth.empty() && a.data.empty()) {
    log << "eval: give --truth and/or --data\n";
    return kExitUsage;
  }
  try {
    const FactorPair est = io::LoadFactors(a.factors[0], a.factors[1]);
    if (!a.truth.empty()) {
      const FactorPair truth = io::LoadFactors(a.truth[0], a.truth[1]);
      out << "rel_err_truth," << Fmt(GroundTruthError(est, truth)) << '\n';
    }
    if (!a.data.empty()) {
      const MaskedMatrix data = io::LoadMaskedMatrix(a.data);
      out << "rel_err_observed," << Fmt(ObservedError(est, data)) << '\n';
    }
  } catch (const Error& e) {
    log << "eval: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace rmfmm::cli

#endif  // RMFMM_TOOLS_COMMANDS_HPP_
