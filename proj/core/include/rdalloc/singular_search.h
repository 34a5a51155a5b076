#pragma once

// Search for the optimal Lagrange multiplier by marching through singular
// multiplier values, i.e. the values of lambda at which the relaxed problem
// has two simultaneously optimal solutions with different rates.

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rdalloc/errors.h"
#include "rdalloc/lagrangian_dp.h"
#include "rdalloc/rd_model.h"

namespace rdalloc {

enum class Direction { kDecrease, kIncrease };

/// A multiplier at which state `owner` switches from `current` to `alt`.
struct SingularCandidate {
  Unit owner_unit = 0;
  QIndex owner_q = 0;
  double value = 0.0;
  BackPointer current;
  BackPointer alt;
  Direction direction = Direction::kDecrease;
};

/// Largest multiplier below the current one at which state (vn, q) gains a
/// larger-rate optimal continuation. Measured against the high-rate
/// resolution, which is the continuation that stays optimal just below the
/// current multiplier. Ratios that are non-finite, <= 0 or not strictly
/// below the current multiplier are discarded.
std::optional<SingularCandidate> candidate_minus(const LagrangeTables& tables,
                                                 const RdInstance& inst,
                                                 Unit vn, QIndex q);

/// Mirror of candidate_minus: smallest multiplier above the current one at
/// which (vn, q) gains a smaller-rate optimal continuation.
std::optional<SingularCandidate> candidate_plus(const LagrangeTables& tables,
                                                const RdInstance& inst,
                                                Unit vn, QIndex q);

/// Selects the closest candidate in the given direction. When several
/// owners share that value the one with the largest unit wins (then the
/// smallest quantizer), because updating it also refreshes every state
/// below it.
std::optional<SingularCandidate> pick_next_singular(
    std::span<const SingularCandidate> candidates, Direction direction);

std::optional<SingularCandidate> next_singular_minus(
    const LagrangeTables& tables, const RdInstance& inst);
std::optional<SingularCandidate> next_singular_plus(
    const LagrangeTables& tables, const RdInstance& inst);

/// Moves the tables to `move.value`. Every state's continuation on the side
/// being left behind is carried over, then states at units <= the owner's
/// unit are recomputed from scratch, highest unit first. With `verify` set
/// the result is compared bit-for-bit against build_lagrange_tables() and a
/// ConsistencyError is thrown on divergence.
void apply_singular_move(LagrangeTables& tables, const RdInstance& inst,
                         const SingularCandidate& move, bool verify = false);

/// True iff both move.current and move.alt attain the owner state's minimum
/// cost (within kTieTolerance) at the tables' multiplier.
bool verify_owner_tie(const LagrangeTables& tables, const RdInstance& inst,
                      const SingularCandidate& move);

struct SearchConfig {
  /// Coarse binary search stops once the bracket is narrower than this
  /// fraction of its midpoint.
  double coarse_width = 1e-6;
  /// Upper limit for bracket doubling.
  double lambda_max = 1e12;
  /// Limit on coarse evaluations plus fine-phase moves.
  int max_iters = 100000;
  /// Compare tables against a full recompute after every move.
  bool verify_updates = false;
  /// Check that both continuations tie at the owner after every move.
  bool check_ties = true;
};

enum class Phase { kCoarse, kFine };
std::string_view phase_name(Phase phase);

struct TraceEntry {
  double lambda = 0.0;
  double rate_lower = 0.0;
  double rate_upper = 0.0;
  Phase phase = Phase::kCoarse;
};

struct SearchResult {
  double lambda_star = 0.0;
  Solution lower;  // R(lower) <= budget
  Solution upper;  // R(upper) >= budget
  double bound = 0.0;  // |D(lower) - D(upper)|
  /// A Lagrangian solution met the budget exactly; lower == upper.
  bool exact = false;
  std::vector<TraceEntry> trace;
  int iterations = 0;  // coarse evaluations + fine moves
  int coarse_evaluations = 0;
  int fine_moves = 0;
  int idle_moves = 0;  // moves that left the global solution unchanged
  int tie_checks = 0;
  int tie_failures = 0;
  int update_checks = 0;
};

/// Raised when SearchConfig::max_iters is exhausted; carries the partial
/// result including the trace.
class IterationLimit : public Error {
 public:
  IterationLimit(const std::string& what, SearchResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const char* kind() const noexcept override { return "IterationLimit"; }
  const SearchResult& partial() const { return partial_; }

 private:
  SearchResult partial_;
};

/// Finds the singular multiplier whose two optimal solutions bracket the
/// budget, starting with a coarse bisection on lambda and finishing by
/// marching through neighbouring singular values.
///
/// Throws Infeasible if the budget is below the minimum achievable rate,
/// IterationLimit if config.max_iters is exceeded, std::invalid_argument if
/// lambda_init is not positive and finite.
SearchResult search_optimal_multiplier(const RdInstance& inst, double budget,
                                       double lambda_init = 1.0,
                                       const SearchConfig& config = {});

/// |D(lower) - D(upper)|: bound on how far D(lower) is from the constrained
/// optimum when R(lower) <= B <= R(upper).
double duality_gap_bound(const Solution& lower, const Solution& upper);

struct StaircaseRow {
  double lambda = 0.0;
  Solution lower;
  Solution upper;
};

struct Staircase {
  std::vector<StaircaseRow> rows;  // increasing lambda
  int moves = 0;
  int idle_moves = 0;
  int tie_checks = 0;
  int tie_failures = 0;
  int update_checks = 0;
};

/// Marches upward through every singular value in [lambda_min, lambda_max].
/// The first row holds the solution just above lambda_min; each following
/// row holds the two optimal solutions at one singular value; a final row at
/// lambda_max is added when lambda_max is finite.
Staircase sweep_singular_values(
    const RdInstance& inst, double lambda_min,
    double lambda_max = std::numeric_limits<double>::infinity(),
    const SearchConfig& config = {});

}  // namespace rdalloc
