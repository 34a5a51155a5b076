#include "rdalloc/lagrangian_dp.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace rdalloc {

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// Calls fn(BackPointer) for every successor of (unit, q) in canonical order:
// increasing unit, then increasing quantizer.
template <typename Fn>
void for_each_successor(int unit_count, int quantizer_count, Unit unit,
                        Fn&& fn) {
  const Unit last = unit == 0 ? 1 : unit_count;
  for (Unit next = unit + 1; next <= last; ++next) {
    for (QIndex qn = 0; qn < quantizer_count; ++qn) fn(BackPointer{next, qn});
  }
}

std::vector<Unit> follow(const LagrangeTables& t, bool high,
                         std::vector<QIndex>& qs) {
  std::vector<Unit> units;
  qs.clear();
  BackPointer p = high ? t.root().high_next : t.root().best_next;
  while (p.unit != 0) {
    units.push_back(p.unit);
    qs.push_back(p.q);
    const LagrangeState& s = t.state(p.unit, p.q);
    p = high ? s.high_next : s.best_next;
  }
  return units;
}

}  // namespace

bool costs_tie(double a, double b) {
  return std::fabs(a - b) <= kTieTolerance * std::max(1.0, std::fabs(a));
}

bool identical(const LagrangeState& a, const LagrangeState& b) {
  return same_bits(a.phi, b.phi) && same_bits(a.psi, b.psi) &&
         same_bits(a.upsilon, b.upsilon) && a.best_next == b.best_next &&
         same_bits(a.psi_high, b.psi_high) &&
         same_bits(a.upsilon_high, b.upsilon_high) &&
         a.high_next == b.high_next && a.tie_alt == b.tie_alt;
}

LagrangeTables::LagrangeTables(int unit_count, int quantizer_count,
                               double lambda)
    : unit_count_(unit_count),
      quantizer_count_(quantizer_count),
      lambda_(lambda),
      states_(static_cast<std::size_t>(unit_count + 1) *
              static_cast<std::size_t>(quantizer_count)) {}

Step step_cost(const RdInstance& inst, Unit unit, QIndex q, BackPointer to) {
  if (unit == 0) return {inst.intra_dist(to.q), inst.intra_rate(to.q)};
  return {inst.delta_unchecked(unit, q, to.unit, to.q),
          inst.pred_rate_unchecked(to.unit, unit, q, to.q)};
}

void evaluate_state(const RdInstance& inst, LagrangeTables& t, Unit unit,
                    QIndex q) {
  LagrangeState& s = t.state(unit, q);
  const int n = t.unit_count();
  const int nq = t.quantizer_count();
  if (unit == n) {
    s = LagrangeState{};
    return;
  }
  const double lambda = t.lambda();

  double min_cost = std::numeric_limits<double>::infinity();
  for_each_successor(n, nq, unit, [&](BackPointer to) {
    const Step step = step_cost(inst, unit, q, to);
    const LagrangeState& succ = t.state(to.unit, to.q);
    const double cost =
        (step.dist + succ.psi) + lambda * (step.rate + succ.upsilon);
    min_cost = std::min(min_cost, cost);
  });

  // Among the tied candidates: the smallest rate-to-go for the low
  // resolution, the largest for the high one. Earlier candidates (smaller
  // unit, then smaller quantizer) win remaining ties.
  bool have_low = false;
  bool have_high = false;
  LagrangeState out;
  for_each_successor(n, nq, unit, [&](BackPointer to) {
    const Step step = step_cost(inst, unit, q, to);
    const LagrangeState& succ = t.state(to.unit, to.q);
    const double dist = step.dist + succ.psi;
    const double rate = step.rate + succ.upsilon;
    const double cost = dist + lambda * rate;
    if (!costs_tie(min_cost, cost)) return;
    if (!have_low || rate < out.upsilon) {
      have_low = true;
      out.phi = cost;
      out.psi = dist;
      out.upsilon = rate;
      out.best_next = to;
    }
    const double rate_high = step.rate + succ.upsilon_high;
    if (!have_high || rate_high > out.upsilon_high) {
      have_high = true;
      out.psi_high = step.dist + succ.psi_high;
      out.upsilon_high = rate_high;
      out.high_next = to;
    }
  });
  if (out.high_next != out.best_next) out.tie_alt = out.high_next;
  s = out;
}

LagrangeTables build_lagrange_tables(const RdInstance& inst, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be finite and nonnegative");
  }
  LagrangeTables t(inst.unit_count(), inst.quantizer_count(), lambda);
  for (Unit unit = inst.unit_count(); unit >= 0; --unit) {
    for (QIndex q = 0; q < t.states_at(unit); ++q) {
      evaluate_state(inst, t, unit, q);
    }
  }
  return t;
}

LagrangianResult solve_lagrangian(const RdInstance& inst, double lambda) {
  LagrangeTables tables = build_lagrange_tables(inst, lambda);
  std::vector<QIndex> qs;
  std::vector<Unit> units = follow(tables, false, qs);
  Solution solution = make_solution(inst, std::move(units), std::move(qs));
  return {std::move(tables), std::move(solution)};
}

ExtremeSolutions extract_extreme_solutions(const LagrangeTables& tables,
                                           const RdInstance& inst) {
  std::vector<QIndex> qs;
  std::vector<Unit> units = follow(tables, false, qs);
  Solution lower = make_solution(inst, std::move(units), qs);
  units = follow(tables, true, qs);
  Solution upper = make_solution(inst, std::move(units), std::move(qs));
  return {std::move(lower), std::move(upper)};
}

double lagrangian_cost(const Solution& solution, double lambda) {
  return solution.total_distortion + lambda * solution.total_rate;
}

Solution solve_min_rate(const RdInstance& inst) {
  const int n = inst.unit_count();
  const int nq = inst.quantizer_count();
  struct Best {
    double rate = 0.0;
    double dist = 0.0;
    BackPointer next;
  };
  std::vector<Best> best(static_cast<std::size_t>(n + 1) *
                         static_cast<std::size_t>(nq));
  auto at = [nq](Unit u, QIndex q) {
    return static_cast<std::size_t>(u) * static_cast<std::size_t>(nq) +
           static_cast<std::size_t>(q);
  };
  for (Unit unit = n - 1; unit >= 0; --unit) {
    const int slots = unit == 0 ? 1 : nq;
    for (QIndex q = 0; q < slots; ++q) {
      bool found = false;
      Best b;
      for_each_successor(n, nq, unit, [&](BackPointer to) {
        const Step step = step_cost(inst, unit, q, to);
        const Best& succ = best[at(to.unit, to.q)];
        const double rate = step.rate + succ.rate;
        const double dist = step.dist + succ.dist;
        if (!found || rate < b.rate || (rate == b.rate && dist < b.dist)) {
          found = true;
          b = Best{rate, dist, to};
        }
      });
      best[at(unit, q)] = b;
    }
  }
  std::vector<Unit> units;
  std::vector<QIndex> qs;
  for (BackPointer p = best[0].next; p.unit != 0;
       p = best[at(p.unit, p.q)].next) {
    units.push_back(p.unit);
    qs.push_back(p.q);
  }
  return make_solution(inst, std::move(units), std::move(qs));
}

}  // namespace rdalloc
