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

// rmfmm: generate synthetic data, solve robust factorization problems and
// evaluate recovered factors.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace rmfmm::cli;
  CLI::App app{"Robust matrix factorization by majorization-minimization"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic data set");
  g->add_option("--kind", gen.kind, "lrmr or nmf")
      ->check(CLI::IsMember({"lrmr", "nmf"}));
  g->add_option("--m", gen.m, "Rows")->check(CLI::PositiveNumber);
  g->add_option("--n", gen.n, "Columns")->check(CLI::PositiveNumber);
  g->add_option("--rank", gen.rank, "Ground-truth rank")
      ->check(CLI::PositiveNumber);
  g->add_option("--outlier-frac", gen.outlier_frac);
  g->add_option("--outlier-lo", gen.outlier_lo);
  g->add_option("--outlier-hi", gen.outlier_hi);
  g->add_option("--missing-frac", gen.missing_frac);
  g->add_option("--sparsity-frac", gen.sparsity_frac, "nmf only");
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "Output directory")->required();

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Fit factors to a data file");
  s->add_option("--data", sol.data)->required();
  s->add_option("--variant", sol.variant)
      ->check(CLI::IsMember({"lrmr", "nmf"}));
  s->add_option("--mm", sol.mm)->check(CLI::IsMember({"lmmm", "gmmm"}));
  s->add_option("--rank", sol.rank)->required();
  s->add_option("--lambda-u", sol.lambda_u, "Default 20/(m+n)");
  s->add_option("--lambda-v", sol.lambda_v, "Default 20/(m+n)");
  s->add_option("--lambda-preset", sol.lambda_preset,
                "recovery, or clustering (lambda_u = 2000/(m+n), nmf only)")
      ->check(CLI::IsMember({"recovery", "clustering"}));
  s->add_option("--tol", sol.tol);
  s->add_option("--max-outer", sol.max_outer);
  s->add_option("--max-inner", sol.max_inner);
  s->add_option("--seed", sol.seed, "Seed for the nmf random start");
  s->add_option("--init", sol.init, "Initial factors: U V")->expected(2);
  s->add_option("--truth", sol.truth, "Ground truth: U V")->expected(2);
  s->add_option("--out", sol.out, "Output directory")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Report relative errors");
  e->add_option("--factors", ev.factors, "U V")->expected(2)->required();
  e->add_option("--truth", ev.truth, "U V")->expected(2);
  e->add_option("--data", ev.data);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*g) return RunGenerate(gen, std::cerr);
  if (*s) return RunSolve(sol, std::cerr);
  return RunEval(ev, std::cout, std::cerr);
}
