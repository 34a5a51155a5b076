#pragma once

// Exhaustive reference solvers. Nothing here shares code with the DP
// solvers; segment costs are re-summed from the raw tables.

#include <cstdint>
#include <vector>

#include "rdalloc/instance_gen.h"
#include "rdalloc/rd_model.h"

namespace rdalloc::oracle {

inline constexpr double kDefaultEnumerationCap = 2e7;

/// Reads RDALLOC_ENUM_CAP from the environment, else the default.
double enumeration_cap_from_env();

/// Number of (subset, quantizer assignment) pairs with units 1 and V coded:
/// Q^2 (1 + Q)^(V - 2).
double enumeration_count(const RdInstance& inst);

/// Minimum-distortion solution with rate <= budget. Ties: smaller rate,
/// then lexicographically smaller unit list, then quantizer list.
/// Throws TooLarge above `cap`, Infeasible if nothing fits.
Solution brute_force(const RdInstance& inst, double budget,
                     double cap = kDefaultEnumerationCap);

/// Exhaustive minimizer of D + lambda R. Costs within a relative 1e-9 count
/// as tied; ties are broken as in brute_force.
Solution lagrangian_brute(const RdInstance& inst, double lambda,
                          double cap = kDefaultEnumerationCap);

struct RdPoint {
  double rate = 0.0;
  double distortion = 0.0;

  auto operator<=>(const RdPoint&) const = default;
};

/// Every distinct (R, D) pair reachable by some selection.
std::vector<RdPoint> enumerate_rd_points(const RdInstance& inst,
                                         double cap = kDefaultEnumerationCap);

struct Plateau {
  RdPoint point;
  double lambda_from = 0.0;  // first grid multiplier producing `point`
  double lambda_to = 0.0;    // last grid multiplier producing `point`
};

/// Dense-grid reference staircase: the Lagrangian optimum at
/// lambda_lo, lambda_lo + step, ..., lambda_hi, collapsed into runs of equal
/// (R, D). The step is halved until the plateau set stops changing.
std::vector<Plateau> convex_hull_sweep(const RdInstance& inst,
                                       double lambda_lo, double lambda_hi,
                                       double resolution,
                                       double cap = kDefaultEnumerationCap);

struct SweepRange {
  double lambda_hi = 0.0;   // above every breakpoint
  double resolution = 0.0;  // below a quarter of the smallest breakpoint gap
};

/// Breakpoints of the lower convex hull of the (R, D) point cloud, i.e.
/// the slopes between consecutive hull vertices, in increasing order.
std::vector<double> hull_breakpoints(const std::vector<RdPoint>& points);

/// A grid range and step fine enough for convex_hull_sweep on `inst`.
SweepRange sweep_range(const RdInstance& inst,
                       double cap = kDefaultEnumerationCap);

/// Optimal total profit of a 0/1 knapsack by the textbook capacity DP.
std::int64_t knapsack_solve(const KnapsackSpec& spec);

}  // namespace rdalloc::oracle
