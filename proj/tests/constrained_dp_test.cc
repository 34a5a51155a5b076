#include "rdalloc/constrained_dp.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rdalloc/errors.h"
#include "rdalloc/instance_gen.h"
#include "rdalloc/lagrangian_dp.h"
#include "rdalloc/oracle.h"
#include "test_support.h"

namespace rdalloc {
namespace {

using testing::all_selections;
using testing::random_instance;
using testing::two_unit_instance;

TEST(SolveConstrained, TwoUnitsUniqueSolution) {
  const RdInstance inst = two_unit_instance(3, 1, 2, 5);
  const Solution s = solve_constrained(inst, 5.0, 1.0);
  EXPECT_EQ(s.coded_units, (std::vector<Unit>{1, 2}));
  EXPECT_EQ(s.total_rate, 5.0);
  EXPECT_EQ(s.total_distortion, 6.0);
  EXPECT_THROW(solve_constrained(inst, 4.0, 1.0), Infeasible);
}

TEST(SolveConstrained, KnapsackInstance) {
  const KnapsackSpec spec{{{3, 5}, {4, 6}, {2, 2}, {5, 9}}, 9, std::nullopt};
  const KnapsackInstance ki = gen_knapsack_instance(spec);
  const Solution s = solve_constrained(ki.instance, ki.budget, 1.0);
  EXPECT_EQ(s.total_distortion,
            4.0 * 10.0 - static_cast<double>(oracle::knapsack_solve(spec)));
  EXPECT_LE(s.total_rate, ki.budget);
}

TEST(SolveConstrained, MatchesBruteForceOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int units = 3 + static_cast<int>(seed % 4);
    const int qs = 2 + static_cast<int>(seed % 2);
    const RdInstance inst = random_instance(units, qs, seed);
    const double lo = solve_min_rate(inst).total_rate;
    for (double budget : {lo, lo + 3, lo + 10, lo + 40}) {
      const Solution dp = solve_constrained(inst, budget, 1.0);
      const Solution bf = oracle::brute_force(inst, budget);
      EXPECT_EQ(dp.total_distortion, bf.total_distortion)
          << "seed " << seed << " budget " << budget;
      EXPECT_LE(dp.total_rate, budget);
    }
  }
}

TEST(SolveConstrained, CanonicalTieBreakMatchesOracle) {
  // Small value ranges make equal-distortion solutions common; the DP and
  // the oracle must pick the same one.
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const RdInstance inst = cli::gen_uniform(5, 2, seed, 3, 3);
    const double lo = solve_min_rate(inst).total_rate;
    for (double budget : {lo, lo + 2, lo + 5}) {
      const Solution dp = solve_constrained(inst, budget, 1.0);
      const Solution bf = oracle::brute_force(inst, budget);
      EXPECT_EQ(dp, bf) << "seed " << seed << " budget " << budget;
    }
  }
}

TEST(SolveConstrained, DistortionNonIncreasingInBudget) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RdInstance inst = random_instance(6, 2, seed);
    double previous = INFINITY;
    const double lo = solve_min_rate(inst).total_rate;
    for (double b = lo; b <= lo + 60; b += 1) {
      const double d = solve_constrained(inst, b, 1.0).total_distortion;
      EXPECT_LE(d, previous);
      previous = d;
    }
  }
}

TEST(SolveConstrained, CeilingRoundingNeverExceedsBudget) {
  // Real-valued rates on a coarse grid: feasible in true rate and never
  // better than the exact optimum.
  InstanceBuilder b(4, {0, 1});
  std::mt19937_64 rng(3);
  auto real = [&] { return static_cast<double>(rng() % 1000) / 97.0; };
  for (QIndex q = 0; q < 2; ++q) b.set_intra(q, real(), real());
  for (Unit v = 2; v <= 4; ++v) {
    for (Unit vp = 1; vp < v; ++vp) {
      for (QIndex qp = 0; qp < 2; ++qp) {
        for (QIndex q = 0; q < 2; ++q) b.set_pred(v, vp, qp, q, real(), real());
      }
    }
  }
  for (Unit l = 1; l <= 4; ++l) {
    for (Unit r = l + 2; r <= 4; ++r) {
      for (Unit u = l + 1; u < r; ++u) {
        for (QIndex a = 0; a < 2; ++a) {
          for (QIndex c = 0; c < 2; ++c) b.set_interp(u, l, r, a, c, real());
        }
      }
    }
  }
  const RdInstance inst = std::move(b).build();
  const double lo = solve_min_rate(inst).total_rate;
  for (double budget = std::ceil(lo) + 1; budget < lo + 40; budget += 2.5) {
    const Solution exact = oracle::brute_force(inst, budget);
    for (double quantum : {0.5, 1.0, 3.0}) {
      try {
        const Solution s = solve_constrained(inst, budget, quantum);
        EXPECT_LE(s.total_rate, budget);
        EXPECT_GE(s.total_distortion, exact.total_distortion);
        const RateDistortion rd =
            evaluate_solution(inst, s.coded_units, s.quantizers);
        EXPECT_EQ(rd.rate, s.total_rate);
      } catch (const Infeasible&) {
        // Rounding may push the cheapest solution over the grid budget.
      }
    }
  }
}

TEST(SolveConstrained, ArgumentChecks) {
  const RdInstance inst = random_instance(4, 2, 1);
  EXPECT_THROW(solve_constrained(inst, 10.0, 0.0), std::invalid_argument);
  EXPECT_THROW(solve_constrained(inst, 10.0, -1.0), std::invalid_argument);
  ConstrainedOptions tiny;
  tiny.max_states = 10;
  EXPECT_THROW(solve_constrained(inst, 1000.0, 1.0, tiny), TooLarge);
}

TEST(SolveConstrained, ReturnedTotalsAreTrueRates) {
  const RdInstance inst = random_instance(5, 3, 21);
  const Solution s = solve_constrained(inst, 40.0, 1.0);
  const RateDistortion rd =
      evaluate_solution(inst, s.coded_units, s.quantizers);
  EXPECT_EQ(rd.rate, s.total_rate);
  EXPECT_EQ(rd.distortion, s.total_distortion);
}

}  // namespace
}  // namespace rdalloc
