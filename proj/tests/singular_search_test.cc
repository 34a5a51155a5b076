#include "rdalloc/singular_search.h"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "rdalloc/constrained_dp.h"
#include "rdalloc/instance_gen.h"
#include "rdalloc/oracle.h"
#include "test_support.h"

namespace rdalloc {
namespace {

using testing::crossing_instance;
using testing::random_instance;

void expect_tables_identical(const LagrangeTables& a, const LagrangeTables& b) {
  ASSERT_EQ(a.lambda(), b.lambda());
  for (Unit u = 0; u <= a.unit_count(); ++u) {
    for (QIndex q = 0; q < a.states_at(u); ++q) {
      EXPECT_TRUE(identical(a.state(u, q), b.state(u, q)))
          << "state (" << u << ", " << q << ") at lambda " << a.lambda();
    }
  }
}

TEST(CandidateMinus, CrossingInstanceFromAbove) {
  const RdInstance inst = crossing_instance();
  const LagrangeTables t = build_lagrange_tables(inst, 2.0);
  const auto c = candidate_minus(t, inst, 1, 0);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->value, 1.5);
  EXPECT_EQ(c->current, (BackPointer{3, 0}));
  EXPECT_EQ(c->alt, (BackPointer{2, 0}));
  EXPECT_EQ(c->direction, Direction::kDecrease);
  EXPECT_FALSE(candidate_minus(t, inst, 2, 0).has_value());
  EXPECT_FALSE(candidate_minus(t, inst, 3, 0).has_value());

  const auto next = next_singular_minus(t, inst);
  ASSERT_TRUE(next.has_value());
  EXPECT_EQ(next->value, 1.5);
  EXPECT_EQ(next->owner_unit, 1);
}

TEST(CandidateMinus, NoneWhenAlreadyAtLargestRate) {
  const RdInstance inst = crossing_instance();
  const LagrangeTables t = build_lagrange_tables(inst, 1.0);
  EXPECT_FALSE(candidate_minus(t, inst, 1, 0).has_value());
  EXPECT_FALSE(next_singular_minus(t, inst).has_value());
}

TEST(CandidatePlus, CrossingInstanceFromBelow) {
  const RdInstance inst = crossing_instance();
  const LagrangeTables t = build_lagrange_tables(inst, 1.0);
  const auto c = candidate_plus(t, inst, 1, 0);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->value, 1.5);
  EXPECT_EQ(c->current, (BackPointer{2, 0}));
  EXPECT_EQ(c->alt, (BackPointer{3, 0}));
  EXPECT_FALSE(candidate_plus(build_lagrange_tables(inst, 2.0), inst, 1, 0)
                   .has_value());
}

TEST(SingularValue, SolutionFlipsAcrossIt) {
  const RdInstance inst = crossing_instance();
  const Solution below = solve_lagrangian(inst, 1.5 - 1e-6).solution;
  const Solution above = solve_lagrangian(inst, 1.5 + 1e-6).solution;
  EXPECT_EQ(below.total_rate, 8.0);
  EXPECT_EQ(below.coded_units, (std::vector<Unit>{1, 2, 3}));
  EXPECT_EQ(above.total_rate, 4.0);
  EXPECT_EQ(above.coded_units, (std::vector<Unit>{1, 3}));
}

SingularCandidate candidate(Unit unit, QIndex q, double value) {
  SingularCandidate c;
  c.owner_unit = unit;
  c.owner_q = q;
  c.value = value;
  return c;
}

TEST(PickNextSingular, ClosestInDirection) {
  const std::vector<SingularCandidate> cs{candidate(1, 0, 1.2),
                                          candidate(2, 0, 1.5)};
  EXPECT_EQ(pick_next_singular(cs, Direction::kDecrease)->value, 1.5);
  EXPECT_EQ(pick_next_singular(cs, Direction::kIncrease)->value, 1.2);
  EXPECT_FALSE(pick_next_singular({}, Direction::kDecrease).has_value());
}

TEST(PickNextSingular, EqualValuesPreferLargestUnitThenSmallestQuantizer) {
  const std::vector<SingularCandidate> cs{
      candidate(2, 0, 1.5), candidate(4, 1, 1.5), candidate(4, 0, 1.5),
      candidate(3, 0, 1.5)};
  for (auto dir : {Direction::kDecrease, Direction::kIncrease}) {
    const auto pick = pick_next_singular(cs, dir);
    EXPECT_EQ(pick->owner_unit, 4);
    EXPECT_EQ(pick->owner_q, 0);
  }
}

TEST(ApplySingularMove, MatchesFullRecomputeOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const RdInstance inst = random_instance(6, 3, seed);
    LagrangeTables down = build_lagrange_tables(inst, 8.0);
    for (int step = 0; step < 50; ++step) {
      const auto move = next_singular_minus(down, inst);
      if (!move) break;
      ASSERT_NO_THROW(apply_singular_move(down, inst, *move, true));
      expect_tables_identical(down, build_lagrange_tables(inst, move->value));
      EXPECT_TRUE(verify_owner_tie(down, inst, *move));
    }
    LagrangeTables up = build_lagrange_tables(inst, 0.05);
    for (int step = 0; step < 50; ++step) {
      const auto move = next_singular_plus(up, inst);
      if (!move) break;
      ASSERT_NO_THROW(apply_singular_move(up, inst, *move, true));
      expect_tables_identical(up, build_lagrange_tables(inst, move->value));
      EXPECT_TRUE(verify_owner_tie(up, inst, *move));
    }
  }
}

TEST(ApplySingularMove, StatesAboveTheOwnerKeepTheirContinuation) {
  // Tie-free instance where the first state to switch sits at unit 1.
  const RdInstance inst = crossing_instance();
  LagrangeTables t = build_lagrange_tables(inst, 2.0);
  const auto move = next_singular_minus(t, inst);
  ASSERT_TRUE(move.has_value());
  ASSERT_EQ(move->owner_unit, 1);
  const LagrangeState before = t.state(2, 0);
  apply_singular_move(t, inst, *move);
  const LagrangeState& after = t.state(2, 0);
  EXPECT_EQ(after.psi, before.psi);
  EXPECT_EQ(after.upsilon, before.upsilon);
  EXPECT_EQ(after.best_next, before.best_next);
  EXPECT_EQ(t.state(1, 0).best_next, (BackPointer{3, 0}));
  EXPECT_EQ(t.state(1, 0).high_next, (BackPointer{2, 0}));
}

TEST(VerifyOwnerTie, HoldsOnlyAtTheSingularValue) {
  const RdInstance inst = crossing_instance();
  LagrangeTables t = build_lagrange_tables(inst, 2.0);
  const auto move = next_singular_minus(t, inst);
  ASSERT_TRUE(move.has_value());
  apply_singular_move(t, inst, *move);
  EXPECT_TRUE(verify_owner_tie(t, inst, *move));
  EXPECT_FALSE(
      verify_owner_tie(build_lagrange_tables(inst, 1.5 + 1e-6), inst, *move));
}

TEST(SearchOptimalMultiplier, SlackBudgetReturnsDistortionOptimum) {
  const RdInstance inst = random_instance(5, 2, 3);
  const Solution widest = solve_lagrangian(inst, 0.0).solution;
  const SearchResult r =
      search_optimal_multiplier(inst, widest.total_rate + 100.0);
  EXPECT_EQ(r.lower, widest);
  EXPECT_EQ(r.upper, widest);
  EXPECT_EQ(r.bound, 0.0);
  EXPECT_FALSE(r.exact);
}

TEST(SearchOptimalMultiplier, ArgumentChecks) {
  const RdInstance inst = random_instance(5, 2, 3);
  const double lo = solve_min_rate(inst).total_rate;
  EXPECT_THROW(search_optimal_multiplier(inst, lo - 1.0), Infeasible);
  EXPECT_THROW(search_optimal_multiplier(inst, lo, 0.0),
               std::invalid_argument);
  EXPECT_THROW(search_optimal_multiplier(inst, lo, -1.0),
               std::invalid_argument);
  EXPECT_THROW(search_optimal_multiplier(inst, lo, INFINITY),
               std::invalid_argument);
  EXPECT_THROW(search_optimal_multiplier(inst, NAN), std::invalid_argument);
}

TEST(SearchOptimalMultiplier, IterationLimitCarriesPartialTrace) {
  const RdInstance inst = gen_synthetic(12, 4, 5, SyntheticProfile::kPerturbed);
  const double lo = solve_min_rate(inst).total_rate;
  const double hi = solve_lagrangian(inst, 0.0).solution.total_rate;
  SearchConfig config;
  config.max_iters = 2;
  try {
    search_optimal_multiplier(inst, std::floor(0.5 * (lo + hi)) + 0.5, 1e-3,
                              config);
    FAIL() << "expected IterationLimit";
  } catch (const IterationLimit& e) {
    EXPECT_EQ(e.partial().iterations, 2);
    EXPECT_EQ(e.partial().trace.size(), 2u);
  }
}

TEST(SearchOptimalMultiplier, ExactKnapsackBudget) {
  // Items (3,5) and (4,6), capacity 3: taking item 1 gives (R, D) = (5, 15),
  // a hull vertex optimal for lambda in (1.5, 5/3).
  const KnapsackInstance ki =
      gen_knapsack_instance({{{3, 5}, {4, 6}}, 3, 10});
  for (double lambda_init : {1e-2, 1.0, 1e3}) {
    const SearchResult r =
        search_optimal_multiplier(ki.instance, ki.budget, lambda_init);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(r.lower, r.upper);
    EXPECT_EQ(r.lower.total_rate, 5.0);
    EXPECT_EQ(r.lower.total_distortion, 15.0);
    EXPECT_EQ(r.bound, 0.0);
  }
}

TEST(SearchOptimalMultiplier, BudgetInsideDualityGap) {
  // Same items, capacity 4: (6, 14) lies above the hull segment from (5, 15)
  // to (9, 9), so the search can only bracket it.
  const KnapsackInstance ki =
      gen_knapsack_instance({{{3, 5}, {4, 6}}, 4, 10});
  const SearchResult r = search_optimal_multiplier(ki.instance, ki.budget);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.lambda_star, 1.5);
  EXPECT_EQ(r.lower.total_rate, 5.0);
  EXPECT_EQ(r.upper.total_rate, 9.0);
  EXPECT_EQ(r.bound, 6.0);
  EXPECT_EQ(solve_constrained(ki.instance, ki.budget, 1.0).total_distortion,
            14.0);
}

TEST(SearchOptimalMultiplier, BracketsAndSandwichesTheOptimum) {
  for (int i = 0; i < 120; ++i) {
    const cli::SuiteInstance si = cli::suite_instance(7, i);
    for (double lambda_init : {1e-3, 1.0, 50.0}) {
      SearchConfig config;
      config.verify_updates = true;
      const SearchResult r =
          search_optimal_multiplier(si.instance, si.budget, lambda_init, config);
      EXPECT_LE(r.lower.total_rate, si.budget);
      EXPECT_GE(r.upper.total_rate, si.budget);
      EXPECT_EQ(r.tie_failures, 0);
      EXPECT_EQ(r.bound, std::fabs(r.lower.total_distortion -
                                   r.upper.total_distortion));
      const double best =
          oracle::brute_force(si.instance, si.budget).total_distortion;
      EXPECT_LE(r.upper.total_distortion, best) << "instance " << i;
      EXPECT_GE(r.lower.total_distortion, best) << "instance " << i;
      EXPECT_LE(r.lower.total_distortion - best, r.bound);
      // Both sides are Lagrangian optima at lambda_star.
      const double cost = solve_lagrangian(si.instance, r.lambda_star)
                              .tables.root()
                              .phi;
      EXPECT_TRUE(costs_tie(lagrangian_cost(r.lower, r.lambda_star), cost));
      EXPECT_TRUE(costs_tie(lagrangian_cost(r.upper, r.lambda_star), cost));
    }
  }
}

TEST(SearchOptimalMultiplier, FinePhaseTraceMovesMonotonically) {
  for (int i = 0; i < 60; ++i) {
    const cli::SuiteInstance si = cli::suite_instance(11, i);
    const SearchResult r = search_optimal_multiplier(si.instance, si.budget);
    std::vector<TraceEntry> fine;
    for (const TraceEntry& e : r.trace) {
      if (e.phase == Phase::kFine) fine.push_back(e);
    }
    EXPECT_EQ(static_cast<int>(r.trace.size()),
              r.coarse_evaluations + r.fine_moves + (fine.empty() ? 0 : 1));
    if (fine.size() < 3) continue;
    const bool down = fine[1].lambda < fine[0].lambda;
    for (std::size_t k = 1; k < fine.size(); ++k) {
      if (down) {
        EXPECT_LT(fine[k].lambda, fine[k - 1].lambda);
      } else {
        EXPECT_GT(fine[k].lambda, fine[k - 1].lambda);
      }
    }
  }
}

TEST(DualityGapBound, Examples) {
  Solution a;
  a.total_distortion = 20;
  Solution b;
  b.total_distortion = 14;
  EXPECT_EQ(duality_gap_bound(a, a), 0.0);
  EXPECT_EQ(duality_gap_bound(a, b), 6.0);
  EXPECT_EQ(duality_gap_bound(b, a), 6.0);
}

TEST(SweepSingularValues, CrossingInstanceHasTwoPlateaus) {
  const Staircase s = sweep_singular_values(crossing_instance(), 0.0);
  ASSERT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.rows[0].lambda, 0.0);
  EXPECT_EQ(s.rows[0].lower.total_rate, 8.0);
  EXPECT_EQ(s.rows[1].lambda, 1.5);
  EXPECT_EQ(s.rows[1].lower.total_rate, 4.0);
  EXPECT_EQ(s.rows[1].upper.total_rate, 8.0);
  EXPECT_EQ(s.moves, 1);
  EXPECT_EQ(s.tie_failures, 0);
}

TEST(SweepSingularValues, FiniteUpperEndAddsFinalRow) {
  const Staircase s = sweep_singular_values(crossing_instance(), 0.0, 10.0);
  ASSERT_EQ(s.rows.size(), 3u);
  EXPECT_EQ(s.rows[2].lambda, 10.0);
  EXPECT_EQ(s.rows[2].lower.total_rate, 4.0);
  EXPECT_EQ(sweep_singular_values(crossing_instance(), 0.0, 1.0).rows.size(),
            2u);
}

TEST(SweepSingularValues, RejectsBadRanges) {
  const RdInstance inst = crossing_instance();
  EXPECT_THROW(sweep_singular_values(inst, -1.0), std::invalid_argument);
  EXPECT_THROW(sweep_singular_values(inst, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(sweep_singular_values(inst, INFINITY), std::invalid_argument);
}

TEST(SweepSingularValues, VisitsEveryConvexHullPoint) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const RdInstance inst = random_instance(5, 2 + seed % 2, seed);
    const oracle::SweepRange range = oracle::sweep_range(inst);
    std::set<oracle::RdPoint> expected;
    for (const oracle::Plateau& p :
         oracle::convex_hull_sweep(inst, 0.0, range.lambda_hi,
                                   range.resolution)) {
      expected.insert(p.point);
    }
    SearchConfig config;
    config.verify_updates = true;
    const Staircase s = sweep_singular_values(inst, 0.0, INFINITY, config);
    std::set<oracle::RdPoint> seen;
    for (const StaircaseRow& row : s.rows) {
      seen.insert({row.lower.total_rate, row.lower.total_distortion});
      seen.insert({row.upper.total_rate, row.upper.total_distortion});
    }
    EXPECT_EQ(seen, expected) << "seed " << seed;
    EXPECT_EQ(s.tie_failures, 0);
  }
}

}  // namespace
}  // namespace rdalloc
