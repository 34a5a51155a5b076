#include "rdalloc/oracle.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "rdalloc/errors.h"

namespace rdalloc::oracle {

namespace {

struct Candidate {
  std::vector<Unit> units;
  std::vector<QIndex> qs;
  double rate = 0.0;
  double dist = 0.0;
};

// Flat re-summation straight from the raw tables.
void naive_totals(const RdInstance& inst, Candidate& c) {
  double rate = inst.intra_rate(c.qs[0]);
  double dist = inst.intra_dist(c.qs[0]);
  for (std::size_t n = 1; n < c.units.size(); ++n) {
    const Unit left = c.units[n - 1];
    const Unit right = c.units[n];
    rate += inst.pred_rate(right, left, c.qs[n - 1], c.qs[n]);
    for (Unit u = left + 1; u < right; ++u) {
      dist += inst.interp_dist(u, left, right, c.qs[n - 1], c.qs[n]);
    }
    dist += inst.coded_dist(right, left, c.qs[n - 1], c.qs[n]);
  }
  c.rate = rate;
  c.dist = dist;
}

void check_cap(const RdInstance& inst, double cap) {
  const double count = enumeration_count(inst);
  if (count > cap) {
    throw TooLarge("exhaustive enumeration needs " + std::to_string(count) +
                   " evaluations, cap is " + std::to_string(cap));
  }
}

// Visits every selection that codes units 1 and V.
void enumerate(const RdInstance& inst,
               const std::function<void(const Candidate&)>& visit) {
  const int n = inst.unit_count();
  const int nq = inst.quantizer_count();
  Candidate c;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 2)); ++mask) {
    c.units.clear();
    c.units.push_back(1);
    for (Unit u = 2; u < n; ++u) {
      if (mask & (std::uint64_t{1} << (u - 2))) c.units.push_back(u);
    }
    c.units.push_back(n);
    c.qs.assign(c.units.size(), 0);
    // Odometer over quantizer assignments.
    while (true) {
      naive_totals(inst, c);
      visit(c);
      std::size_t i = c.qs.size();
      while (i > 0) {
        --i;
        if (++c.qs[i] < nq) break;
        c.qs[i] = 0;
        if (i == 0) {
          i = c.qs.size() + 1;
          break;
        }
      }
      if (i == c.qs.size() + 1) break;
    }
  }
}

// Smaller rate, then lexicographic unit list, then quantizer list.
bool tie_order_less(const Candidate& a, const Candidate& b) {
  if (a.rate != b.rate) return a.rate < b.rate;
  if (a.units != b.units) return a.units < b.units;
  return a.qs < b.qs;
}

Solution to_checked_solution(const RdInstance& inst, const Candidate& c) {
  const RateDistortion rd = evaluate_solution(inst, c.units, c.qs);
  auto close = [](double x, double y) {
    return std::fabs(x - y) <= 1e-9 * std::max(1.0, std::fabs(x));
  };
  if (!close(rd.rate, c.rate) || !close(rd.distortion, c.dist)) {
    throw ConsistencyError(
        "evaluate_solution disagrees with flat re-summation");
  }
  return Solution{c.units, c.qs, c.rate, c.dist};
}

bool costs_tie(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a));
}

}  // namespace

double enumeration_cap_from_env() {
  if (const char* env = std::getenv("RDALLOC_ENUM_CAP")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return kDefaultEnumerationCap;
}

double enumeration_count(const RdInstance& inst) {
  const double q = inst.quantizer_count();
  return q * q * std::pow(1.0 + q, inst.unit_count() - 2);
}

Solution brute_force(const RdInstance& inst, double budget, double cap) {
  check_cap(inst, cap);
  bool found = false;
  Candidate best;
  enumerate(inst, [&](const Candidate& c) {
    if (!(c.rate <= budget)) return;
    if (!found || c.dist < best.dist ||
        (c.dist == best.dist && tie_order_less(c, best))) {
      found = true;
      best = c;
    }
  });
  if (!found) throw Infeasible("no selection fits the budget");
  return to_checked_solution(inst, best);
}

Solution lagrangian_brute(const RdInstance& inst, double lambda, double cap) {
  check_cap(inst, cap);
  double min_cost = std::numeric_limits<double>::infinity();
  enumerate(inst, [&](const Candidate& c) {
    min_cost = std::min(min_cost, c.dist + lambda * c.rate);
  });
  bool found = false;
  Candidate best;
  enumerate(inst, [&](const Candidate& c) {
    if (!costs_tie(min_cost, c.dist + lambda * c.rate)) return;
    if (!found || tie_order_less(c, best)) {
      found = true;
      best = c;
    }
  });
  return to_checked_solution(inst, best);
}

std::vector<RdPoint> enumerate_rd_points(const RdInstance& inst, double cap) {
  check_cap(inst, cap);
  std::set<RdPoint> points;
  enumerate(inst,
            [&](const Candidate& c) { points.insert({c.rate, c.dist}); });
  return {points.begin(), points.end()};
}

std::vector<double> hull_breakpoints(const std::vector<RdPoint>& points) {
  // Lowest distortion per rate, by increasing rate.
  std::vector<RdPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  std::vector<RdPoint> frontier;
  for (const RdPoint& p : sorted) {
    if (!frontier.empty() && frontier.back().rate == p.rate) continue;
    frontier.push_back(p);
  }
  // Lower hull, dropping collinear points.
  std::vector<RdPoint> hull;
  for (const RdPoint& p : frontier) {
    while (hull.size() >= 2) {
      const RdPoint& a = hull[hull.size() - 2];
      const RdPoint& b = hull.back();
      const double cross = (b.rate - a.rate) * (p.distortion - a.distortion) -
                           (b.distortion - a.distortion) * (p.rate - a.rate);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }
  // Only the descending part is optimal for some lambda >= 0.
  std::vector<double> breakpoints;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    const double drop = hull[i - 1].distortion - hull[i].distortion;
    if (!(drop > 0.0)) break;
    breakpoints.push_back(drop / (hull[i].rate - hull[i - 1].rate));
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  return breakpoints;
}

SweepRange sweep_range(const RdInstance& inst, double cap) {
  const std::vector<double> bps = hull_breakpoints(enumerate_rd_points(inst, cap));
  SweepRange range;
  if (bps.empty()) {
    range.lambda_hi = 1.0;
    range.resolution = 0.25;
    return range;
  }
  double min_gap = bps.front();
  for (std::size_t i = 1; i < bps.size(); ++i) {
    min_gap = std::min(min_gap, bps[i] - bps[i - 1]);
  }
  range.lambda_hi = 2.0 * bps.back() + 1.0;
  range.resolution = min_gap / 4.0;
  return range;
}

namespace {

std::vector<Plateau> grid_plateaus(const std::vector<RdPoint>& points,
                                   double lo, double hi, double step) {
  const double count = std::floor((hi - lo) / step) + 1.0;
  if (count > 2e7) {
    throw TooLarge("grid sweep needs " + std::to_string(count) + " points");
  }
  std::vector<Plateau> out;
  const auto steps = static_cast<std::int64_t>(count);
  for (std::int64_t k = 0; k < steps; ++k) {
    const double lambda = lo + static_cast<double>(k) * step;
    double min_cost = std::numeric_limits<double>::infinity();
    for (const RdPoint& p : points) {
      min_cost = std::min(min_cost, p.distortion + lambda * p.rate);
    }
    const RdPoint* best = nullptr;
    for (const RdPoint& p : points) {
      if (!costs_tie(min_cost, p.distortion + lambda * p.rate)) continue;
      if (best == nullptr || p.rate < best->rate) best = &p;
    }
    if (!out.empty() && out.back().point == *best) {
      out.back().lambda_to = lambda;
    } else {
      out.push_back({*best, lambda, lambda});
    }
  }
  return out;
}

std::set<RdPoint> plateau_points(const std::vector<Plateau>& plateaus) {
  std::set<RdPoint> s;
  for (const Plateau& p : plateaus) s.insert(p.point);
  return s;
}

}  // namespace

std::vector<Plateau> convex_hull_sweep(const RdInstance& inst,
                                       double lambda_lo, double lambda_hi,
                                       double resolution, double cap) {
  if (!(resolution > 0.0) || !(lambda_hi >= lambda_lo)) {
    throw std::invalid_argument("bad sweep range or resolution");
  }
  const std::vector<RdPoint> points = enumerate_rd_points(inst, cap);
  std::vector<Plateau> current =
      grid_plateaus(points, lambda_lo, lambda_hi, resolution);
  for (int halvings = 0; halvings < 8; ++halvings) {
    resolution *= 0.5;
    std::vector<Plateau> finer =
        grid_plateaus(points, lambda_lo, lambda_hi, resolution);
    const bool stable = plateau_points(finer) == plateau_points(current);
    current = std::move(finer);
    if (stable) break;
  }
  return current;
}

std::int64_t knapsack_solve(const KnapsackSpec& spec) {
  if (spec.capacity < 0) return 0;
  if (spec.capacity > 100'000'000) {
    throw TooLarge("knapsack capacity too large for the table");
  }
  std::vector<std::int64_t> best(static_cast<std::size_t>(spec.capacity) + 1,
                                 0);
  for (const KnapsackItem& item : spec.items) {
    for (std::int64_t w = spec.capacity; w >= item.weight; --w) {
      const auto i = static_cast<std::size_t>(w);
      best[i] = std::max(best[i], best[i - static_cast<std::size_t>(item.weight)] +
                                      item.profit);
    }
  }
  return best.back();
}

}  // namespace rdalloc::oracle
