#pragma once

#include <cstddef>

#include "rdalloc/rd_model.h"

namespace rdalloc {

struct ConstrainedOptions {
  /// Upper bound on memo entries (unit x quantizer x budget grid).
  std::size_t max_states = 200'000'000;
};

/// Exact rate-constrained allocation by memoized recursion over
/// (coded unit, quantizer, remaining budget).
///
/// Every rate is rounded up to a multiple of `quantum` and the budget is
/// rounded down, so the returned solution never exceeds `budget` in true
/// rate. When all rates are exact multiples of `quantum` the result is the
/// true constrained optimum. Among equal-distortion solutions the one with
/// smaller true rate wins, then the lexicographically smaller coded-unit
/// list, then the lexicographically smaller quantizer list.
///
/// Throws Infeasible if no solution fits the budget grid, TooLarge if the
/// memo would exceed `options.max_states`, std::invalid_argument if
/// quantum <= 0.
Solution solve_constrained(const RdInstance& inst, double budget,
                           double quantum,
                           const ConstrainedOptions& options = {});

}  // namespace rdalloc
