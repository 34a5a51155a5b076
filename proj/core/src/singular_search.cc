#include "rdalloc/singular_search.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rdalloc {

namespace {

template <typename Fn>
void for_each_successor(const LagrangeTables& t, Unit unit, Fn&& fn) {
  const Unit last = unit == 0 ? 1 : t.unit_count();
  for (Unit next = unit + 1; next <= last; ++next) {
    for (QIndex qn = 0; qn < t.quantizer_count(); ++qn) {
      fn(BackPointer{next, qn});
    }
  }
}

template <typename Fn>
void for_each_state(const LagrangeTables& t, Fn&& fn) {
  for (Unit unit = 0; unit < t.unit_count(); ++unit) {
    for (QIndex q = 0; q < t.states_at(unit); ++q) fn(unit, q);
  }
}

// Carries the continuation that remains optimal past the current multiplier
// in the direction of travel over to both resolutions.
void collapse_towards(LagrangeTables& t, Direction direction,
                      double new_lambda) {
  for (Unit unit = 0; unit <= t.unit_count(); ++unit) {
    for (QIndex q = 0; q < t.states_at(unit); ++q) {
      LagrangeState& s = t.state(unit, q);
      if (direction == Direction::kDecrease) {
        s.psi = s.psi_high;
        s.upsilon = s.upsilon_high;
        s.best_next = s.high_next;
      } else {
        s.psi_high = s.psi;
        s.upsilon_high = s.upsilon;
        s.high_next = s.best_next;
      }
      s.tie_alt.reset();
      s.phi = s.psi + new_lambda * s.upsilon;
    }
  }
}

void check_against_full_recompute(const LagrangeTables& t,
                                  const RdInstance& inst) {
  const LagrangeTables fresh = build_lagrange_tables(inst, t.lambda());
  for (Unit unit = 0; unit <= t.unit_count(); ++unit) {
    for (QIndex q = 0; q < t.states_at(unit); ++q) {
      if (!identical(t.state(unit, q), fresh.state(unit, q))) {
        throw ConsistencyError(
            "incremental update diverged from full recompute at state (" +
            std::to_string(unit) + ", " + std::to_string(q) +
            ") for lambda " + std::to_string(t.lambda()));
      }
    }
  }
}

bool rate_brackets(const Solution& lower, const Solution& upper,
                   double budget) {
  return lower.total_rate <= budget && budget <= upper.total_rate;
}

}  // namespace

std::string_view phase_name(Phase phase) {
  return phase == Phase::kCoarse ? "coarse" : "fine";
}

std::optional<SingularCandidate> candidate_minus(const LagrangeTables& t,
                                                 const RdInstance& inst,
                                                 Unit vn, QIndex q) {
  if (vn >= t.unit_count()) return std::nullopt;
  const LagrangeState& s = t.state(vn, q);
  std::optional<SingularCandidate> best;
  for_each_successor(t, vn, [&](BackPointer to) {
    const Step step = step_cost(inst, vn, q, to);
    const LagrangeState& succ = t.state(to.unit, to.q);
    const double dist = step.dist + succ.psi_high;
    const double rate = step.rate + succ.upsilon_high;
    if (!(rate > s.upsilon_high)) return;
    const double value = (s.psi_high - dist) / (rate - s.upsilon_high);
    if (!std::isfinite(value) || value <= 0.0 || !(value < t.lambda())) {
      return;
    }
    if (!best || value > best->value) {
      best = SingularCandidate{vn, q, value, s.high_next, to,
                               Direction::kDecrease};
    }
  });
  return best;
}

std::optional<SingularCandidate> candidate_plus(const LagrangeTables& t,
                                                const RdInstance& inst,
                                                Unit vn, QIndex q) {
  if (vn >= t.unit_count()) return std::nullopt;
  const LagrangeState& s = t.state(vn, q);
  std::optional<SingularCandidate> best;
  for_each_successor(t, vn, [&](BackPointer to) {
    const Step step = step_cost(inst, vn, q, to);
    const LagrangeState& succ = t.state(to.unit, to.q);
    const double dist = step.dist + succ.psi;
    const double rate = step.rate + succ.upsilon;
    if (!(rate < s.upsilon)) return;
    const double value = (dist - s.psi) / (s.upsilon - rate);
    if (!std::isfinite(value) || value <= 0.0 || !(value > t.lambda())) {
      return;
    }
    if (!best || value < best->value) {
      best = SingularCandidate{vn, q, value, s.best_next, to,
                               Direction::kIncrease};
    }
  });
  return best;
}

std::optional<SingularCandidate> pick_next_singular(
    std::span<const SingularCandidate> candidates, Direction direction) {
  std::optional<SingularCandidate> best;
  for (const SingularCandidate& c : candidates) {
    if (!best) {
      best = c;
      continue;
    }
    const bool closer = direction == Direction::kDecrease
                            ? c.value > best->value
                            : c.value < best->value;
    const bool same_value = c.value == best->value;
    const bool owner_first =
        c.owner_unit > best->owner_unit ||
        (c.owner_unit == best->owner_unit && c.owner_q < best->owner_q);
    if (closer || (same_value && owner_first)) best = c;
  }
  return best;
}

std::optional<SingularCandidate> next_singular_minus(const LagrangeTables& t,
                                                     const RdInstance& inst) {
  std::vector<SingularCandidate> candidates;
  for_each_state(t, [&](Unit unit, QIndex q) {
    if (auto c = candidate_minus(t, inst, unit, q)) candidates.push_back(*c);
  });
  return pick_next_singular(candidates, Direction::kDecrease);
}

std::optional<SingularCandidate> next_singular_plus(const LagrangeTables& t,
                                                    const RdInstance& inst) {
  std::vector<SingularCandidate> candidates;
  for_each_state(t, [&](Unit unit, QIndex q) {
    if (auto c = candidate_plus(t, inst, unit, q)) candidates.push_back(*c);
  });
  return pick_next_singular(candidates, Direction::kIncrease);
}

void apply_singular_move(LagrangeTables& t, const RdInstance& inst,
                         const SingularCandidate& move, bool verify) {
  const Direction direction =
      move.value < t.lambda() ? Direction::kDecrease : Direction::kIncrease;
  collapse_towards(t, direction, move.value);
  t.set_lambda(move.value);
  for (Unit unit = move.owner_unit; unit >= 0; --unit) {
    for (QIndex q = 0; q < t.states_at(unit); ++q) {
      evaluate_state(inst, t, unit, q);
    }
  }
  if (verify) check_against_full_recompute(t, inst);
}

bool verify_owner_tie(const LagrangeTables& t, const RdInstance& inst,
                      const SingularCandidate& move) {
  const Unit unit = move.owner_unit;
  const QIndex q = move.owner_q;
  double min_cost = std::numeric_limits<double>::infinity();
  double cost_current = min_cost;
  double cost_alt = min_cost;
  for_each_successor(t, unit, [&](BackPointer to) {
    const Step step = step_cost(inst, unit, q, to);
    const LagrangeState& succ = t.state(to.unit, to.q);
    const double cost =
        (step.dist + succ.psi) + t.lambda() * (step.rate + succ.upsilon);
    min_cost = std::min(min_cost, cost);
    if (to == move.current) cost_current = cost;
    if (to == move.alt) cost_alt = cost;
  });
  return costs_tie(min_cost, cost_current) && costs_tie(min_cost, cost_alt);
}

double duality_gap_bound(const Solution& lower, const Solution& upper) {
  return std::fabs(lower.total_distortion - upper.total_distortion);
}

namespace {

class MultiplierSearch {
 public:
  MultiplierSearch(const RdInstance& inst, double budget,
                   const SearchConfig& config)
      : inst_(inst), budget_(budget), config_(config) {}

  SearchResult run(double lambda_init) {
    const Solution min_rate = solve_min_rate(inst_);
    if (budget_ < min_rate.total_rate) {
      throw Infeasible("budget " + std::to_string(budget_) +
                       " is below the minimum achievable rate " +
                       std::to_string(min_rate.total_rate));
    }

    // Lambda -> 0+: the largest-rate Lagrangian solution.
    Solution widest = evaluate(0.0);
    if (widest.total_rate <= budget_) return finish_single(0.0, widest);

    Solution start = evaluate(lambda_init);
    if (start.total_rate == budget_) return finish_single(lambda_init, start);

    // Bracket [a, b] with R(a) > B > R(b).
    double a = 0.0;
    double b = 0.0;
    Solution sa;
    Solution sb;
    if (start.total_rate > budget_) {
      a = lambda_init;
      sa = start;
      double lambda = lambda_init;
      while (true) {
        lambda = std::min(2.0 * lambda, config_.lambda_max);
        Solution s = evaluate(lambda);
        if (s.total_rate == budget_) return finish_single(lambda, s);
        if (s.total_rate < budget_) {
          b = lambda;
          sb = std::move(s);
          break;
        }
        a = lambda;
        sa = std::move(s);
        if (lambda >= config_.lambda_max) {
          // Still over budget at the cap; march up from here.
          return fine_phase(a);
        }
      }
    } else {
      b = lambda_init;
      sb = start;
      double lambda = lambda_init;
      while (true) {
        lambda *= 0.5;
        if (lambda < std::numeric_limits<double>::min()) {
          return fine_phase(b);
        }
        Solution s = evaluate(lambda);
        if (s.total_rate == budget_) return finish_single(lambda, s);
        if (s.total_rate > budget_) {
          a = lambda;
          sa = std::move(s);
          break;
        }
        b = lambda;
        sb = std::move(s);
      }
    }

    // Bisect until two consecutive midpoints bring no new solution.
    int stale = 0;
    while (stale < 2) {
      const double mid = 0.5 * (a + b);
      if (b - a < config_.coarse_width * mid) break;
      Solution s = evaluate(mid);
      if (s.total_rate == budget_) return finish_single(mid, s);
      const bool seen = same_selection(s, sa) || same_selection(s, sb);
      stale = seen ? stale + 1 : 0;
      if (s.total_rate > budget_) {
        a = mid;
        sa = std::move(s);
      } else {
        b = mid;
        sb = std::move(s);
      }
    }
    return fine_phase(b);
  }

 private:
  Solution evaluate(double lambda) {
    count_iteration();
    ++result_.coarse_evaluations;
    Solution s = solve_lagrangian(inst_, lambda).solution;
    result_.trace.push_back(
        {lambda, s.total_rate, s.total_rate, Phase::kCoarse});
    return s;
  }

  void count_iteration() {
    if (result_.iterations >= config_.max_iters) {
      throw IterationLimit("multiplier search exceeded " +
                               std::to_string(config_.max_iters) +
                               " iterations",
                           result_);
    }
    ++result_.iterations;
  }

  SearchResult finish_single(double lambda, const Solution& s) {
    result_.lambda_star = lambda;
    result_.lower = s;
    result_.upper = s;
    result_.bound = 0.0;
    result_.exact = s.total_rate == budget_;
    return std::move(result_);
  }

  SearchResult fine_phase(double lambda) {
    LagrangeTables tables = build_lagrange_tables(inst_, lambda);
    ExtremeSolutions ext = extract_extreme_solutions(tables, inst_);
    result_.trace.push_back({lambda, ext.lower.total_rate,
                             ext.upper.total_rate, Phase::kFine});
    while (true) {
      if (ext.lower.total_rate == budget_) {
        return finish_single(tables.lambda(), ext.lower);
      }
      if (ext.upper.total_rate == budget_) {
        return finish_single(tables.lambda(), ext.upper);
      }
      if (rate_brackets(ext.lower, ext.upper, budget_)) {
        result_.lambda_star = tables.lambda();
        result_.bound = duality_gap_bound(ext.lower, ext.upper);
        result_.lower = std::move(ext.lower);
        result_.upper = std::move(ext.upper);
        return std::move(result_);
      }
      const bool go_down = ext.upper.total_rate < budget_;
      std::optional<SingularCandidate> move =
          go_down ? next_singular_minus(tables, inst_)
                  : next_singular_plus(tables, inst_);
      if (!move) {
        // Unreachable when the pre-checks hold: the budget lies between the
        // minimum rate and the rate at lambda -> 0.
        throw ConsistencyError("ran out of singular values before " +
                               std::string(go_down ? "reaching" : "meeting") +
                               " the budget");
      }
      count_iteration();
      ++result_.fine_moves;
      apply_singular_move(tables, inst_, *move, config_.verify_updates);
      if (config_.verify_updates) ++result_.update_checks;
      if (config_.check_ties) {
        ++result_.tie_checks;
        if (!verify_owner_tie(tables, inst_, *move)) ++result_.tie_failures;
      }
      ext = extract_extreme_solutions(tables, inst_);
      if (same_selection(ext.lower, ext.upper)) ++result_.idle_moves;
      result_.trace.push_back({tables.lambda(), ext.lower.total_rate,
                               ext.upper.total_rate, Phase::kFine});
    }
  }

  const RdInstance& inst_;
  double budget_;
  SearchConfig config_;
  SearchResult result_;
};

}  // namespace

SearchResult search_optimal_multiplier(const RdInstance& inst, double budget,
                                       double lambda_init,
                                       const SearchConfig& config) {
  if (!(lambda_init > 0.0) || !std::isfinite(lambda_init)) {
    throw std::invalid_argument("lambda_init must be positive and finite");
  }
  if (std::isnan(budget)) throw std::invalid_argument("budget is NaN");
  return MultiplierSearch(inst, budget, config).run(lambda_init);
}

Staircase sweep_singular_values(const RdInstance& inst, double lambda_min,
                                double lambda_max,
                                const SearchConfig& config) {
  if (!(lambda_min >= 0.0) || !std::isfinite(lambda_min)) {
    throw std::invalid_argument("lambda_min must be finite and nonnegative");
  }
  if (!(lambda_max >= lambda_min)) {
    throw std::invalid_argument("lambda_max must be >= lambda_min");
  }
  Staircase out;
  LagrangeTables tables = build_lagrange_tables(inst, lambda_min);
  ExtremeSolutions ext = extract_extreme_solutions(tables, inst);
  // Just above lambda_min the low-rate resolution is the optimum.
  out.rows.push_back({lambda_min, ext.lower, ext.lower});

  while (true) {
    std::optional<SingularCandidate> move = next_singular_plus(tables, inst);
    if (!move || move->value > lambda_max) break;
    if (out.moves >= config.max_iters) {
      throw IterationLimit("sweep exceeded " +
                               std::to_string(config.max_iters) + " moves",
                           SearchResult{});
    }
    ++out.moves;
    apply_singular_move(tables, inst, *move, config.verify_updates);
    if (config.verify_updates) ++out.update_checks;
    if (config.check_ties) {
      ++out.tie_checks;
      if (!verify_owner_tie(tables, inst, *move)) ++out.tie_failures;
    }
    ext = extract_extreme_solutions(tables, inst);
    if (same_selection(ext.lower, ext.upper)) ++out.idle_moves;
    out.rows.push_back({tables.lambda(), ext.lower, ext.upper});
  }
  if (std::isfinite(lambda_max) && out.rows.back().lambda < lambda_max) {
    const Solution& above = out.rows.back().lower;
    out.rows.push_back({lambda_max, above, above});
  }
  return out;
}

}  // namespace rdalloc
