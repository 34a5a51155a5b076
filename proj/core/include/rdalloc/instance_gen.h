#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rdalloc/rd_model.h"

namespace rdalloc {

struct KnapsackItem {
  std::int64_t weight = 0;
  std::int64_t profit = 0;
};

struct KnapsackSpec {
  std::vector<KnapsackItem> items;
  std::int64_t capacity = 0;
  /// Distortion of an uncoded intermediate unit. Defaults to 1 + max profit.
  std::optional<std::int64_t> base_distortion;

  std::int64_t effective_base_distortion() const;
};

struct KnapsackInstance {
  RdInstance instance;
  double budget = 0.0;  // capacity + 2
};

/// Encodes a 0/1 knapsack as a single-quantizer allocation instance with
/// V = M + 2 units. Unit m + 1 stands for item m: coding it costs the item's
/// weight and lowers its distortion from D to D - profit. The two boundary
/// units cost one rate unit each and carry no distortion.
///
/// Throws std::invalid_argument if a weight, profit or the capacity is
/// negative, or if the base distortion does not exceed every profit.
KnapsackInstance gen_knapsack_instance(const KnapsackSpec& spec);

enum class SyntheticProfile { kConvex, kPerturbed };

std::optional<SyntheticProfile> parse_profile(std::string_view name);
std::string_view profile_name(SyntheticProfile profile);

/// Seeded synthetic instance with integer-valued tables.
///
/// For each unit the unpredicted operating points lie on a convex decreasing
/// curve: rate halves per quantizer step while distortion grows linearly.
/// Prediction from a distant or coarse reference raises rate and distortion;
/// interpolation distortion grows with the reference gap. kPerturbed adds
/// seeded noise so that some operating points fall off the convex hull.
/// Output depends only on the arguments, on every platform.
RdInstance gen_synthetic(int unit_count, int quantizer_count,
                         std::uint64_t seed, SyntheticProfile profile);

/// Seeded random knapsack spec with `item_count` items, integer weights in
/// [1, max_weight], profits in [0, max_profit] and a capacity drawn between
/// 0 and the total weight.
KnapsackSpec random_knapsack_spec(int item_count, std::int64_t max_weight,
                                  std::int64_t max_profit, std::uint64_t seed);

}  // namespace rdalloc
