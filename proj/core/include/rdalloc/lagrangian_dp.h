#pragma once

#include <optional>
#include <vector>

#include "rdalloc/rd_model.h"

namespace rdalloc {

/// Relative tolerance under which two Lagrangian costs are treated as tied.
inline constexpr double kTieTolerance = 1e-9;

/// |a - b| <= kTieTolerance * max(1, |a|).
bool costs_tie(double a, double b);

/// Successor choice of a DP state. unit == 0 marks "no successor" (the
/// states of unit V).
struct BackPointer {
  Unit unit = 0;
  QIndex q = 0;

  bool operator==(const BackPointer&) const = default;
};

/// Cost-to-go of one (unit, quantizer) state at a fixed multiplier.
///
/// The `psi`/`upsilon`/`best_next` fields describe the optimal continuation
/// that resolves every tie towards the smaller rate-to-go; `*_high` fields
/// resolve ties towards the larger one. They differ only at singular
/// multipliers, where they are the two simultaneously optimal continuations.
struct LagrangeState {
  double phi = 0.0;      // psi + lambda * upsilon
  double psi = 0.0;      // distortion-to-go
  double upsilon = 0.0;  // rate-to-go
  BackPointer best_next;
  double psi_high = 0.0;
  double upsilon_high = 0.0;
  BackPointer high_next;
  /// The highest-rate tied successor, when it differs from best_next.
  std::optional<BackPointer> tie_alt;
};

/// Exact (bitwise) equality of every field.
bool identical(const LagrangeState& a, const LagrangeState& b);

/// DP tables for all states at one multiplier.
///
/// States are indexed by (unit, quantizer) for units 1..V. Unit 0 is the
/// root: a single state (quantizer 0) whose successors are the possible
/// quantizers of unit 1, costed by the intra tables. States of unit V have
/// no successors and all-zero costs.
class LagrangeTables {
 public:
  LagrangeTables(int unit_count, int quantizer_count, double lambda);

  double lambda() const { return lambda_; }
  void set_lambda(double lambda) { lambda_ = lambda; }
  int unit_count() const { return unit_count_; }
  int quantizer_count() const { return quantizer_count_; }

  const LagrangeState& state(Unit unit, QIndex q) const {
    return states_[index(unit, q)];
  }
  LagrangeState& state(Unit unit, QIndex q) { return states_[index(unit, q)]; }
  const LagrangeState& root() const { return states_[0]; }

  /// Number of quantizer slots in use at `unit` (1 for the root).
  int states_at(Unit unit) const { return unit == 0 ? 1 : quantizer_count_; }

 private:
  std::size_t index(Unit unit, QIndex q) const {
    return static_cast<std::size_t>(unit) *
               static_cast<std::size_t>(quantizer_count_) +
           static_cast<std::size_t>(q);
  }

  int unit_count_;
  int quantizer_count_;
  double lambda_;
  std::vector<LagrangeState> states_;
};

/// Distortion and rate contributed by taking successor `to` from state
/// (unit, q): the segment tables for unit >= 1, the intra tables for the
/// root.
struct Step {
  double dist = 0.0;
  double rate = 0.0;
};
Step step_cost(const RdInstance& inst, Unit unit, QIndex q, BackPointer to);

/// Recomputes one state from its successors' current entries.
void evaluate_state(const RdInstance& inst, LagrangeTables& tables, Unit unit,
                    QIndex q);

/// Fills every state at `lambda` in one backward pass. Throws
/// std::invalid_argument unless lambda is finite and >= 0.
LagrangeTables build_lagrange_tables(const RdInstance& inst, double lambda);

struct LagrangianResult {
  LagrangeTables tables;
  Solution solution;  // low-rate tie resolution
};

/// Minimizes D + lambda * R over all selections. O(V^2 Q^2).
LagrangianResult solve_lagrangian(const RdInstance& inst, double lambda);

struct ExtremeSolutions {
  Solution lower;  // smallest-rate optimum
  Solution upper;  // largest-rate optimum
};

/// Follows the low-rate and high-rate back-pointers from the root. At a
/// non-singular multiplier both coincide.
ExtremeSolutions extract_extreme_solutions(const LagrangeTables& tables,
                                           const RdInstance& inst);

double lagrangian_cost(const Solution& solution, double lambda);

/// Minimum-rate selection, ties broken by smaller distortion. This is the
/// Lagrangian optimum for every sufficiently large multiplier.
Solution solve_min_rate(const RdInstance& inst);

}  // namespace rdalloc
