#pragma once

// Oracle cross-check suite behind `rdalloc verify` and the acceptance test.

#include <cstdint>
#include <string>
#include <vector>

#include "rdalloc/oracle.h"
#include "rdalloc/rd_model.h"

namespace rdalloc::cli {

/// Seeded instance with independent uniform integer entries: rates in
/// [0, max_rate], distortions in [0, max_dist]. Small ranges produce many
/// exact ties, which is the point.
RdInstance gen_uniform(int unit_count, int quantizer_count,
                       std::uint64_t seed, int max_rate = 12,
                       int max_dist = 20);

struct SuiteInstance {
  RdInstance instance;
  double budget = 0.0;
};

/// The i-th random suite instance: V in [3, 6], Q in {2, 3}, alternating
/// between gen_uniform and perturbed gen_synthetic tables. The budget is an
/// integer between the minimum rate and the rate of the distortion-optimal
/// solution.
SuiteInstance suite_instance(std::uint64_t seed, int index);

struct SuiteConfig {
  std::uint64_t seed = 1;
  int random_instances = 200;
  int knapsack_specs = 50;
  int exact_specs = 50;
  int completeness_instances = 50;
  bool scale = true;
  double enum_cap = oracle::kDefaultEnumerationCap;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_suite(const SuiteConfig& config);

/// Cross-checks on one user-supplied instance: validation first, then the
/// oracle comparisons if the instance is valid and small enough.
std::vector<CriterionResult> check_instance(const RdInstance& inst,
                                            double enum_cap);

/// "PASS  [1] name: detail (0.12 s)"
std::string format_result(const CriterionResult& r);

}  // namespace rdalloc::cli
