#include "rdalloc/lagrangian_dp.h"

#include <cmath>

#include <gtest/gtest.h>

#include "rdalloc/oracle.h"
#include "test_support.h"

namespace rdalloc {
namespace {

using testing::all_selections;
using testing::crossing_instance;
using testing::random_instance;

TEST(SolveLagrangian, ZeroMultiplierMinimizesDistortion) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RdInstance inst = random_instance(5, 3, seed);
    const Solution s = solve_lagrangian(inst, 0.0).solution;
    const Solution bf = oracle::lagrangian_brute(inst, 0.0);
    EXPECT_EQ(s.total_distortion, bf.total_distortion) << "seed " << seed;
    EXPECT_EQ(s.total_rate, bf.total_rate) << "seed " << seed;
  }
}

TEST(SolveLagrangian, LargeMultiplierGivesMinimumRate) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RdInstance inst = random_instance(5, 2, seed);
    double max_d = 0.0;
    double min_r = INFINITY;
    for (const auto& sel : all_selections(inst)) {
      const RateDistortion rd = evaluate_solution(inst, sel.units, sel.qs);
      max_d = std::max(max_d, rd.distortion);
      min_r = std::min(min_r, rd.rate);
    }
    // Rates are integers, so the smallest nonzero rate gap is at least 1.
    const double lambda = 2.0 * max_d + 1.0;
    const Solution s = solve_lagrangian(inst, lambda).solution;
    EXPECT_EQ(s.total_rate, min_r);
    EXPECT_EQ(s.total_distortion, solve_min_rate(inst).total_distortion);
  }
}

TEST(SolveLagrangian, CostMatchesBruteForceOnLambdaGrid) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const RdInstance inst =
        random_instance(3 + static_cast<int>(seed % 4), 2 + static_cast<int>(seed % 2), seed);
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 10.0}) {
      const Solution dp = solve_lagrangian(inst, lambda).solution;
      const Solution bf = oracle::lagrangian_brute(inst, lambda);
      EXPECT_EQ(lagrangian_cost(dp, lambda), lagrangian_cost(bf, lambda));
      EXPECT_EQ(dp.total_rate, bf.total_rate);
    }
  }
}

TEST(SolveLagrangian, RejectsBadMultipliers) {
  const RdInstance inst = random_instance(3, 2, 1);
  EXPECT_THROW(solve_lagrangian(inst, -1.0), std::invalid_argument);
  EXPECT_THROW(solve_lagrangian(inst, NAN), std::invalid_argument);
  EXPECT_THROW(solve_lagrangian(inst, INFINITY), std::invalid_argument);
}

TEST(LagrangeTables, BaseCaseAndTableIdentity) {
  const RdInstance inst = random_instance(6, 3, 4);
  for (double lambda : {0.0, 0.75, 3.0}) {
    const LagrangeTables t = build_lagrange_tables(inst, lambda);
    for (QIndex q = 0; q < 3; ++q) {
      const LagrangeState& s = t.state(6, q);
      EXPECT_EQ(s.phi, 0.0);
      EXPECT_EQ(s.psi, 0.0);
      EXPECT_EQ(s.upsilon, 0.0);
      EXPECT_EQ(s.best_next.unit, 0);
    }
    for (Unit u = 0; u <= 6; ++u) {
      for (QIndex q = 0; q < t.states_at(u); ++q) {
        const LagrangeState& s = t.state(u, q);
        EXPECT_EQ(s.psi + lambda * s.upsilon, s.phi);
      }
    }
  }
}

TEST(LagrangeTables, ReplayOfBackPointers) {
  const RdInstance inst = random_instance(6, 2, 8);
  const double lambda = 1.25;
  const LagrangeTables t = build_lagrange_tables(inst, lambda);
  for (Unit u = 0; u < 6; ++u) {
    for (QIndex q = 0; q < t.states_at(u); ++q) {
      const LagrangeState& s = t.state(u, q);
      const Step step = step_cost(inst, u, q, s.best_next);
      const LagrangeState& next = t.state(s.best_next.unit, s.best_next.q);
      EXPECT_EQ(s.psi, step.dist + next.psi);
      EXPECT_EQ(s.upsilon, step.rate + next.upsilon);
      EXPECT_EQ(s.phi, (step.dist + next.psi) +
                           lambda * (step.rate + next.upsilon));
    }
  }
}

TEST(LagrangianCost, Arithmetic) {
  Solution s;
  s.total_distortion = 14;
  s.total_rate = 6;
  EXPECT_EQ(lagrangian_cost(s, 0.0), 14.0);
  EXPECT_EQ(lagrangian_cost(s, 1.0), 20.0);
}

TEST(LagrangianCost, EqualsRootCost) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RdInstance inst = random_instance(5, 3, seed);
    const LagrangianResult r = solve_lagrangian(inst, 0.5);
    EXPECT_EQ(lagrangian_cost(r.solution, 0.5), r.tables.root().phi);
  }
}

TEST(ExtremeSolutions, CoincideAwayFromSingularValues) {
  const RdInstance inst = crossing_instance();
  for (double lambda : {0.0, 1.0, 1.4, 1.6, 5.0}) {
    const ExtremeSolutions e =
        extract_extreme_solutions(build_lagrange_tables(inst, lambda), inst);
    EXPECT_EQ(e.lower, e.upper) << lambda;
  }
}

TEST(ExtremeSolutions, CrossingInstanceAtOnePointFive) {
  const RdInstance inst = crossing_instance();
  const ExtremeSolutions e =
      extract_extreme_solutions(build_lagrange_tables(inst, 1.5), inst);
  EXPECT_EQ(e.lower.total_rate, 4.0);
  EXPECT_EQ(e.upper.total_rate, 8.0);
  EXPECT_EQ(lagrangian_cost(e.lower, 1.5), 16.0);
  EXPECT_EQ(lagrangian_cost(e.upper, 1.5), 16.0);
  const RateDistortion lo =
      evaluate_solution(inst, e.lower.coded_units, e.lower.quantizers);
  const RateDistortion hi =
      evaluate_solution(inst, e.upper.coded_units, e.upper.quantizers);
  EXPECT_EQ(lo.distortion + 1.5 * lo.rate, 16.0);
  EXPECT_EQ(hi.distortion + 1.5 * hi.rate, 16.0);
  EXPECT_EQ(solve_lagrangian(inst, 1.5).solution, e.lower);
}

TEST(SolveLagrangian, RateNonIncreasingInMultiplier) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RdInstance inst = random_instance(6, 3, seed);
    double previous = INFINITY;
    for (double lambda = 0.0; lambda <= 20.0; lambda += 0.125) {
      const double r = solve_lagrangian(inst, lambda).solution.total_rate;
      EXPECT_LE(r, previous) << "seed " << seed << " lambda " << lambda;
      previous = r;
    }
  }
}

TEST(SolveMinRate, MatchesEnumeration) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RdInstance inst = random_instance(5, 2, seed);
    double best_r = INFINITY;
    double best_d = INFINITY;
    for (const auto& sel : all_selections(inst)) {
      const RateDistortion rd = evaluate_solution(inst, sel.units, sel.qs);
      if (rd.rate < best_r || (rd.rate == best_r && rd.distortion < best_d)) {
        best_r = rd.rate;
        best_d = rd.distortion;
      }
    }
    const Solution s = solve_min_rate(inst);
    EXPECT_EQ(s.total_rate, best_r);
    EXPECT_EQ(s.total_distortion, best_d);
  }
}

TEST(CostsTie, RelativeTolerance) {
  EXPECT_TRUE(costs_tie(16.0, 16.0));
  EXPECT_TRUE(costs_tie(0.0, 1e-10));
  EXPECT_FALSE(costs_tie(0.0, 1e-8));
  EXPECT_TRUE(costs_tie(1e12, 1e12 + 100));
  EXPECT_FALSE(costs_tie(1e12, 1e12 + 10000));
}

}  // namespace
}  // namespace rdalloc
