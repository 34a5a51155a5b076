// rdalloc: generate instances, solve them, sweep the multiplier staircase and
// run the oracle cross-check suite.

#include <iostream>

#include <CLI11.hpp>

#include "commands.h"

int main(int argc, char** argv) {
  using namespace rdalloc::cli;

  CLI::App app{"Dependent rate allocation solvers"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance");
  gen_cmd->add_option("kind", gen.kind, "synthetic or knapsack")
      ->required()
      ->check(CLI::IsMember({"synthetic", "knapsack"}));
  gen_cmd->add_option("--units,-V", gen.units, "Number of units (synthetic)");
  gen_cmd->add_option("--quantizers,-Q", gen.quantizers,
                      "Number of quantizers (synthetic)");
  gen_cmd->add_option("--profile", gen.profile, "convex or perturbed")
      ->check(CLI::IsMember({"convex", "perturbed"}));
  gen_cmd->add_option("--spec", gen.spec_path, "Knapsack spec JSON file");
  gen_cmd->add_option("--items", gen.items, "Random knapsack item count");
  gen_cmd->add_option("--max-weight", gen.max_weight);
  gen_cmd->add_option("--max-profit", gen.max_profit);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_flag("--dense", gen.dense, "Dense nested-array tables");
  gen_cmd->add_option("--out,-o", gen.out_path, "Output file (default stdout)");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance");
  solve_cmd->add_option("instance", solve.instance_path)->required();
  solve_cmd->add_option("--method", solve.method)
      ->required()
      ->check(CLI::IsMember({"constrained", "lagrangian", "search"}));
  solve_cmd->add_option("--budget", solve.budget);
  solve_cmd->add_option("--quantum", solve.quantum);
  solve_cmd->add_option("--lambda", solve.lambda);
  solve_cmd->add_option("--lambda-init", solve.lambda_init);
  solve_cmd->add_option("--max-iters", solve.max_iters);
  solve_cmd->add_flag("--verify-updates", solve.verify_updates,
                      "Check every table update against a full recompute");
  solve_cmd->add_option("--out,-o", solve.out_path);

  SweepArgs sweep;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Write the R-vs-lambda staircase as CSV");
  sweep_cmd->add_option("instance", sweep.instance_path)->required();
  sweep_cmd->add_option("--lambda-min", sweep.lambda_min);
  sweep_cmd->add_option("--lambda-max", sweep.lambda_max);
  sweep_cmd->add_option("--max-iters", sweep.max_iters);
  sweep_cmd->add_flag("--verify-updates", sweep.verify_updates);
  sweep_cmd->add_option("--out,-o", sweep.out_path);

  VerifyArgs verify;
  auto* verify_cmd =
      app.add_subcommand("verify", "Run the oracle cross-check suite");
  verify_cmd->add_option("--seed", verify.seed);
  verify_cmd->add_option("--instances", verify.random_instances);
  verify_cmd->add_option("--knapsack", verify.knapsack_specs);
  verify_cmd->add_option("--exact", verify.exact_specs);
  verify_cmd->add_option("--completeness", verify.completeness_instances);
  verify_cmd->add_flag("--skip-scale", verify.skip_scale);
  verify_cmd->add_option("--instance", verify.instance_path,
                         "Check a single instance file instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*gen_cmd) return cmd_gen(gen, std::cout, std::cerr);
  if (*solve_cmd) return cmd_solve(solve, std::cout, std::cerr);
  if (*sweep_cmd) return cmd_sweep(sweep, std::cout, std::cerr);
  return cmd_verify(verify, std::cout, std::cerr);
}
