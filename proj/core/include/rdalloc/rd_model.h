#pragma once

// Problem instance and solution representations for dependent rate
// allocation over an ordered sequence of data units.
//
// Units are labelled 1..V. Quantizers are referred to by their position in
// RdInstance::quantizers(); the integer labels themselves (e.g. QP values)
// are opaque and never interpreted by the solvers.

#include <cstddef>
#include <string>
#include <vector>

namespace rdalloc {

using Unit = int;
using QIndex = int;

struct RateDistortion {
  double rate = 0.0;
  double distortion = 0.0;
};

/// A selection of coded units with their quantizers, plus its evaluated
/// rate and distortion.
struct Solution {
  std::vector<Unit> coded_units;
  std::vector<QIndex> quantizers;
  double total_rate = 0.0;
  double total_distortion = 0.0;

  bool operator==(const Solution&) const = default;
};

/// True when both solutions code the same units at the same quantizers.
bool same_selection(const Solution& a, const Solution& b);

class InstanceBuilder;

/// Immutable rate/distortion tables for one optimization window.
///
/// Missing table entries are represented as NaN; validate_instance() reports
/// them. The per-segment distortion table is filled once at construction, so
/// a built instance can be shared freely between threads.
class RdInstance {
 public:
  int unit_count() const { return unit_count_; }
  int quantizer_count() const { return static_cast<int>(quantizers_.size()); }
  const std::vector<int>& quantizers() const { return quantizers_; }

  double intra_rate(QIndex q) const;
  double intra_dist(QIndex q) const;
  double pred_rate(Unit v, Unit v_prev, QIndex q_prev, QIndex q) const;
  double coded_dist(Unit v, Unit v_prev, QIndex q_prev, QIndex q) const;
  double interp_dist(Unit u, Unit v_left, Unit v_right, QIndex q_left,
                     QIndex q_right) const;

  /// Distortion of the interpolated units strictly between v_prev and v plus
  /// the distortion of coded unit v. Throws IndexError on a bad range.
  double delta(Unit v_prev, QIndex q_prev, Unit v, QIndex q) const;

  // Unchecked fast paths for the solvers. Callers guarantee
  // 1 <= v_prev < v <= V and valid quantizer indices.
  double pred_rate_unchecked(Unit v, Unit v_prev, QIndex q_prev,
                             QIndex q) const {
    return pred_rate_[pair_index(v, v_prev, q_prev, q)];
  }
  double delta_unchecked(Unit v_prev, QIndex q_prev, Unit v, QIndex q) const {
    return delta_[pair_index(v, v_prev, q_prev, q)];
  }

  bool operator==(const RdInstance& other) const;

 private:
  friend class InstanceBuilder;
  RdInstance(int unit_count, std::vector<int> quantizers);

  std::size_t pair_index(Unit v, Unit v_prev, QIndex q_prev, QIndex q) const {
    const auto n = static_cast<std::size_t>(unit_count_);
    const auto nq = quantizers_.size();
    return ((static_cast<std::size_t>(v - 1) * n +
             static_cast<std::size_t>(v_prev - 1)) *
                nq +
            static_cast<std::size_t>(q_prev)) *
               nq +
           static_cast<std::size_t>(q);
  }
  std::size_t interp_index(Unit u, Unit v_left, Unit v_right, QIndex q_left,
                           QIndex q_right) const;
  void check_pair(Unit v, Unit v_prev, QIndex q_prev, QIndex q) const;
  void check_quantizer(QIndex q) const;
  void fill_delta();

  int unit_count_ = 0;
  std::vector<int> quantizers_;
  std::vector<double> intra_rate_;
  std::vector<double> intra_dist_;
  std::vector<double> pred_rate_;   // [v][v_prev][q_prev][q]
  std::vector<double> coded_dist_;  // [v][v_prev][q_prev][q]
  std::vector<std::size_t> interp_offset_;  // per (v_left, v_right) pair
  std::vector<double> interp_dist_;
  std::vector<double> delta_;  // memoized segment distortion
};

/// Mutable staging area for an RdInstance. All entries start missing.
class InstanceBuilder {
 public:
  InstanceBuilder(int unit_count, std::vector<int> quantizers);

  int unit_count() const { return inst_.unit_count(); }
  int quantizer_count() const { return inst_.quantizer_count(); }

  InstanceBuilder& set_intra(QIndex q, double rate, double dist);
  InstanceBuilder& set_pred(Unit v, Unit v_prev, QIndex q_prev, QIndex q,
                            double rate, double dist);
  InstanceBuilder& set_interp(Unit u, Unit v_left, Unit v_right,
                              QIndex q_left, QIndex q_right, double dist);

  RdInstance build() &&;

 private:
  RdInstance inst_;
};

double delta_segment(const RdInstance& inst, Unit v_prev, QIndex q_prev,
                     Unit v, QIndex q);

/// Total rate and distortion of coding `coded` at quantizers `qs`.
/// Throws InvalidSolution unless coded starts at 1, ends at V, is strictly
/// increasing and matches qs in length.
RateDistortion evaluate_solution(const RdInstance& inst,
                                 const std::vector<Unit>& coded,
                                 const std::vector<QIndex>& qs);

/// Builds a Solution with its rate and distortion filled in.
Solution make_solution(const RdInstance& inst, std::vector<Unit> coded,
                       std::vector<QIndex> qs);

struct Violation {
  std::string table;    // "intra_rate", "pred_rate", "interp_dist", ...
  std::string index;    // e.g. "(u=2, v_left=1, v_right=3, q_left=0, q_right=1)"
  std::string problem;  // "missing", "negative", "non-finite"

  std::string to_string() const;
};

/// Checks totality, nonnegativity and finiteness of every table entry.
/// Returns every violation found; an empty list means the instance is valid.
std::vector<Violation> validate_instance(const RdInstance& inst);

}  // namespace rdalloc
