#pragma once

// Subcommand handlers. Each returns a process exit code; results go to
// `out` (or the --out file) and machine-readable errors to `err`.

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rdalloc/rd_model.h"

namespace rdalloc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitTooLarge = 4,
  kExitIterationLimit = 5,
  kExitParseError = 6,
  kExitInvalidInstance = 7,
};

/// Maps an exception to its exit code and writes {"error": kind,
/// "message": ...} (plus a partial result where one exists) to `err`.
int report_error(const std::exception& e, std::ostream& err);

struct GenArgs {
  std::string kind;  // "synthetic" or "knapsack"
  // synthetic
  int units = 5;
  int quantizers = 3;
  std::string profile = "perturbed";
  // knapsack: either a spec file or a random spec
  std::string spec_path;
  int items = 8;
  std::int64_t max_weight = 10;
  std::int64_t max_profit = 10;
  std::uint64_t seed = 1;
  bool dense = false;
  std::string out_path;  // empty: stdout
};

/// Knapsack spec file: {"items": [{"weight": w, "profit": p}, ...],
/// "capacity": W, "base_distortion": D (optional)}.
int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err);

struct SolveArgs {
  std::string instance_path;
  std::string method;  // "constrained", "lagrangian" or "search"
  std::optional<double> budget;
  double quantum = 1.0;
  std::optional<double> lambda;
  double lambda_init = 1.0;
  int max_iters = 100000;
  bool verify_updates = false;
  std::string out_path;
};

/// Builds the run report for an already-loaded instance; throws on solver
/// errors. "wall_time_ms" is the only field that varies between runs.
nlohmann::json solve_report(const RdInstance& inst, const SolveArgs& args);

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);

struct SweepArgs {
  std::string instance_path;
  double lambda_min = 0.0;
  double lambda_max = std::numeric_limits<double>::infinity();
  int max_iters = 100000;
  bool verify_updates = false;
  std::string out_path;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct VerifyArgs {
  std::uint64_t seed = 1;
  int random_instances = 200;
  int knapsack_specs = 50;
  int exact_specs = 50;
  int completeness_instances = 50;
  bool skip_scale = false;
  std::string instance_path;  // check one instance instead of the suite
};

/// Prints the pass/fail matrix; exit code 1 if any row failed.
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

}  // namespace rdalloc::cli
