#include "rdalloc/constrained_dp.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rdalloc/errors.h"

namespace rdalloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t to_grid_ceil(double rate, double quantum) {
  const double q = std::ceil(rate / quantum);
  if (!(q < 9.0e18)) throw TooLarge("rate too large for the budget grid");
  return static_cast<std::int64_t>(q);
}

// A coded unit at a quantizer with the budget left after paying for it.
// Its continuation towards unit V is stored in the memo.
struct Head {
  Unit unit = 0;
  QIndex q = 0;
  std::int64_t budget = 0;
};

struct Entry {
  double dist = kInf;  // distortion of units unit+1..V
  double rate = kInf;  // true rate of units unit+1..V
  Head next;
};

class ConstrainedSolver {
 public:
  ConstrainedSolver(const RdInstance& inst, double quantum,
                    std::int64_t budget_grid, std::size_t max_states)
      : inst_(inst),
        n_(inst.unit_count()),
        nq_(inst.quantizer_count()),
        quantum_(quantum) {
    grid_pred_.resize(static_cast<std::size_t>(n_ + 1) * n_ * nq_ * nq_, 0);
    std::int64_t reachable = 0;
    std::int64_t max_intra = 0;
    for (QIndex q = 0; q < nq_; ++q) {
      max_intra = std::max(max_intra, to_grid_ceil(inst.intra_rate(q), quantum));
    }
    reachable += max_intra;
    for (Unit v = 2; v <= n_; ++v) {
      std::int64_t max_in = 0;
      for (Unit vp = 1; vp < v; ++vp) {
        for (QIndex qp = 0; qp < nq_; ++qp) {
          for (QIndex q = 0; q < nq_; ++q) {
            const std::int64_t g = to_grid_ceil(
                inst.pred_rate_unchecked(v, vp, qp, q), quantum);
            grid_pred_[grid_index(v, vp, qp, q)] = g;
            max_in = std::max(max_in, g);
          }
        }
      }
      reachable += max_in;
    }
    // Budget beyond the largest reachable total rate changes nothing.
    budget_ = std::min(budget_grid, reachable);
    const double states = static_cast<double>(n_) * nq_ *
                          (static_cast<double>(budget_) + 1.0);
    if (states > static_cast<double>(max_states)) {
      throw TooLarge("constrained DP table would need " +
                     std::to_string(static_cast<long long>(states)) +
                     " entries; increase the quantum");
    }
    const auto size = static_cast<std::size_t>(states);
    memo_.resize(size);
    visited_.assign(size, 0);
  }

  std::int64_t budget() const { return budget_; }

  Solution solve_root() {
    bool found = false;
    double best_dist = kInf;
    double best_rate = kInf;
    Head best;
    for (QIndex q = 0; q < nq_; ++q) {
      const std::int64_t g = to_grid_ceil(inst_.intra_rate(q), quantum_);
      if (g > budget_) continue;
      const Head head{1, q, budget_ - g};
      const Entry& sub = solve(head);
      if (sub.dist == kInf) continue;
      const double d = inst_.intra_dist(q) + sub.dist;
      const double r = inst_.intra_rate(q) + sub.rate;
      if (!found || better(d, r, head, best_dist, best_rate, best)) {
        found = true;
        best_dist = d;
        best_rate = r;
        best = head;
      }
    }
    if (!found) {
      throw Infeasible("no allocation fits the rate budget");
    }
    std::vector<Unit> units;
    std::vector<QIndex> qs;
    Head h = best;
    while (true) {
      units.push_back(h.unit);
      qs.push_back(h.q);
      if (h.unit == n_) break;
      h = entry(h).next;
    }
    return make_solution(inst_, std::move(units), std::move(qs));
  }

 private:
  std::size_t grid_index(Unit v, Unit vp, QIndex qp, QIndex q) const {
    return ((static_cast<std::size_t>(v) * n_ + static_cast<std::size_t>(vp)) *
                nq_ +
            static_cast<std::size_t>(qp)) *
               nq_ +
           static_cast<std::size_t>(q);
  }

  std::size_t memo_index(const Head& h) const {
    return (static_cast<std::size_t>(h.unit - 1) * nq_ +
            static_cast<std::size_t>(h.q)) *
               static_cast<std::size_t>(budget_ + 1) +
           static_cast<std::size_t>(h.budget);
  }

  const Entry& entry(const Head& h) const { return memo_[memo_index(h)]; }

  // Lexicographic comparison of the unit lists, then the quantizer lists,
  // of the two chains starting at a and b. Both chains end at unit V.
  int compare_chains(Head a, Head b) const {
    for (Head x = a, y = b;; x = entry(x).next, y = entry(y).next) {
      if (x.unit != y.unit) return x.unit < y.unit ? -1 : 1;
      if (x.unit == n_) break;
    }
    for (Head x = a, y = b;; x = entry(x).next, y = entry(y).next) {
      if (x.q != y.q) return x.q < y.q ? -1 : 1;
      if (x.unit == n_) break;
    }
    return 0;
  }

  bool better(double d, double r, const Head& h, double best_d, double best_r,
              const Head& best_h) const {
    if (d != best_d) return d < best_d;
    if (r != best_r) return r < best_r;
    return compare_chains(h, best_h) < 0;
  }

  const Entry& solve(const Head& h) {
    const std::size_t idx = memo_index(h);
    if (visited_[idx]) return memo_[idx];
    visited_[idx] = 1;

    Entry best;
    bool found = false;
    for (Unit next = h.unit + 1; next <= n_; ++next) {
      for (QIndex qn = 0; qn < nq_; ++qn) {
        const std::int64_t g = grid_pred_[grid_index(next, h.unit, h.q, qn)];
        if (g > h.budget) continue;
        const Head head{next, qn, h.budget - g};
        double d = inst_.delta_unchecked(h.unit, h.q, next, qn);
        double r = inst_.pred_rate_unchecked(next, h.unit, h.q, qn);
        if (next < n_) {
          const Entry& sub = solve(head);
          if (sub.dist == kInf) continue;
          d += sub.dist;
          r += sub.rate;
        }
        if (!found || better(d, r, head, best.dist, best.rate, best.next)) {
          found = true;
          best = Entry{d, r, head};
        }
      }
    }
    memo_[idx] = best;
    return memo_[idx];
  }

  const RdInstance& inst_;
  int n_;
  int nq_;
  double quantum_;
  std::int64_t budget_ = 0;
  std::vector<std::int64_t> grid_pred_;
  std::vector<Entry> memo_;
  std::vector<std::uint8_t> visited_;
};

}  // namespace

Solution solve_constrained(const RdInstance& inst, double budget,
                           double quantum, const ConstrainedOptions& options) {
  if (!(quantum > 0.0) || !std::isfinite(quantum)) {
    throw std::invalid_argument("quantum must be positive and finite");
  }
  if (!(budget >= 0.0)) {
    throw Infeasible("rate budget is negative");
  }
  const double grid = std::floor(budget / quantum);
  const std::int64_t budget_grid =
      grid >= 9.0e18 ? std::numeric_limits<std::int64_t>::max() / 2
                     : static_cast<std::int64_t>(grid);
  ConstrainedSolver solver(inst, quantum, budget_grid, options.max_states);
  return solver.solve_root();
}

}  // namespace rdalloc
