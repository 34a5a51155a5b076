#include "rdalloc/rd_model.h"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "rdalloc/errors.h"

namespace rdalloc {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Strict comparison that treats NaN == NaN, so that partially populated
// instances still compare equal to themselves.
bool same_entries(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) && std::isnan(b[i])) continue;
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

bool same_selection(const Solution& a, const Solution& b) {
  return a.coded_units == b.coded_units && a.quantizers == b.quantizers;
}

RdInstance::RdInstance(int unit_count, std::vector<int> quantizers)
    : unit_count_(unit_count), quantizers_(std::move(quantizers)) {
  if (unit_count_ < 2) {
    throw std::invalid_argument("unit_count must be at least 2");
  }
  if (quantizers_.empty()) {
    throw std::invalid_argument("at least one quantizer is required");
  }
  if (std::set<int>(quantizers_.begin(), quantizers_.end()).size() !=
      quantizers_.size()) {
    throw std::invalid_argument("quantizer labels must be distinct");
  }
  const auto n = static_cast<std::size_t>(unit_count_);
  const auto nq = quantizers_.size();
  intra_rate_.assign(nq, kMissing);
  intra_dist_.assign(nq, kMissing);
  pred_rate_.assign(n * n * nq * nq, kMissing);
  coded_dist_.assign(n * n * nq * nq, kMissing);

  interp_offset_.assign((n + 1) * (n + 1), 0);
  std::size_t offset = 0;
  for (Unit left = 1; left <= unit_count_; ++left) {
    for (Unit right = left + 2; right <= unit_count_; ++right) {
      interp_offset_[static_cast<std::size_t>(left) * (n + 1) +
                     static_cast<std::size_t>(right)] = offset;
      offset += static_cast<std::size_t>(right - left - 1) * nq * nq;
    }
  }
  interp_dist_.assign(offset, kMissing);
}

void RdInstance::check_quantizer(QIndex q) const {
  if (q < 0 || q >= quantizer_count()) {
    throw IndexError("quantizer index " + std::to_string(q) +
                     " out of range [0, " + std::to_string(quantizer_count()) +
                     ")");
  }
}

void RdInstance::check_pair(Unit v, Unit v_prev, QIndex q_prev,
                            QIndex q) const {
  if (v_prev < 1 || v > unit_count_ || v_prev >= v) {
    throw IndexError("need 1 <= v_prev < v <= " + std::to_string(unit_count_) +
                     ", got v_prev=" + std::to_string(v_prev) +
                     " v=" + std::to_string(v));
  }
  check_quantizer(q_prev);
  check_quantizer(q);
}

std::size_t RdInstance::interp_index(Unit u, Unit v_left, Unit v_right,
                                     QIndex q_left, QIndex q_right) const {
  if (v_left < 1 || v_right > unit_count_ || !(v_left < u && u < v_right)) {
    throw IndexError("need 1 <= v_left < u < v_right <= " +
                     std::to_string(unit_count_) + ", got u=" +
                     std::to_string(u) + " v_left=" + std::to_string(v_left) +
                     " v_right=" + std::to_string(v_right));
  }
  check_quantizer(q_left);
  check_quantizer(q_right);
  const auto n = static_cast<std::size_t>(unit_count_);
  const auto nq = quantizers_.size();
  const std::size_t base = interp_offset_[static_cast<std::size_t>(v_left) *
                                              (n + 1) +
                                          static_cast<std::size_t>(v_right)];
  return base +
         (static_cast<std::size_t>(u - v_left - 1) * nq +
          static_cast<std::size_t>(q_left)) *
             nq +
         static_cast<std::size_t>(q_right);
}

double RdInstance::intra_rate(QIndex q) const {
  check_quantizer(q);
  return intra_rate_[static_cast<std::size_t>(q)];
}

double RdInstance::intra_dist(QIndex q) const {
  check_quantizer(q);
  return intra_dist_[static_cast<std::size_t>(q)];
}

double RdInstance::pred_rate(Unit v, Unit v_prev, QIndex q_prev,
                             QIndex q) const {
  check_pair(v, v_prev, q_prev, q);
  return pred_rate_[pair_index(v, v_prev, q_prev, q)];
}

double RdInstance::coded_dist(Unit v, Unit v_prev, QIndex q_prev,
                              QIndex q) const {
  check_pair(v, v_prev, q_prev, q);
  return coded_dist_[pair_index(v, v_prev, q_prev, q)];
}

double RdInstance::interp_dist(Unit u, Unit v_left, Unit v_right,
                               QIndex q_left, QIndex q_right) const {
  return interp_dist_[interp_index(u, v_left, v_right, q_left, q_right)];
}

double RdInstance::delta(Unit v_prev, QIndex q_prev, Unit v, QIndex q) const {
  check_pair(v, v_prev, q_prev, q);
  return delta_[pair_index(v, v_prev, q_prev, q)];
}

void RdInstance::fill_delta() {
  delta_.assign(pred_rate_.size(), kMissing);
  const int nq = quantizer_count();
  for (Unit v = 2; v <= unit_count_; ++v) {
    for (Unit v_prev = 1; v_prev < v; ++v_prev) {
      for (QIndex qp = 0; qp < nq; ++qp) {
        for (QIndex q = 0; q < nq; ++q) {
          double sum = 0.0;
          for (Unit u = v_prev + 1; u < v; ++u) {
            sum += interp_dist_[interp_index(u, v_prev, v, qp, q)];
          }
          const std::size_t idx = pair_index(v, v_prev, qp, q);
          delta_[idx] = sum + coded_dist_[idx];
        }
      }
    }
  }
}

bool RdInstance::operator==(const RdInstance& other) const {
  return unit_count_ == other.unit_count_ &&
         quantizers_ == other.quantizers_ &&
         same_entries(intra_rate_, other.intra_rate_) &&
         same_entries(intra_dist_, other.intra_dist_) &&
         same_entries(pred_rate_, other.pred_rate_) &&
         same_entries(coded_dist_, other.coded_dist_) &&
         same_entries(interp_dist_, other.interp_dist_);
}

InstanceBuilder::InstanceBuilder(int unit_count, std::vector<int> quantizers)
    : inst_(unit_count, std::move(quantizers)) {}

InstanceBuilder& InstanceBuilder::set_intra(QIndex q, double rate,
                                            double dist) {
  inst_.check_quantizer(q);
  inst_.intra_rate_[static_cast<std::size_t>(q)] = rate;
  inst_.intra_dist_[static_cast<std::size_t>(q)] = dist;
  return *this;
}

InstanceBuilder& InstanceBuilder::set_pred(Unit v, Unit v_prev, QIndex q_prev,
                                           QIndex q, double rate,
                                           double dist) {
  inst_.check_pair(v, v_prev, q_prev, q);
  const std::size_t idx = inst_.pair_index(v, v_prev, q_prev, q);
  inst_.pred_rate_[idx] = rate;
  inst_.coded_dist_[idx] = dist;
  return *this;
}

InstanceBuilder& InstanceBuilder::set_interp(Unit u, Unit v_left,
                                             Unit v_right, QIndex q_left,
                                             QIndex q_right, double dist) {
  inst_.interp_dist_[inst_.interp_index(u, v_left, v_right, q_left,
                                        q_right)] = dist;
  return *this;
}

RdInstance InstanceBuilder::build() && {
  inst_.fill_delta();
  return std::move(inst_);
}

double delta_segment(const RdInstance& inst, Unit v_prev, QIndex q_prev,
                     Unit v, QIndex q) {
  return inst.delta(v_prev, q_prev, v, q);
}

RateDistortion evaluate_solution(const RdInstance& inst,
                                 const std::vector<Unit>& coded,
                                 const std::vector<QIndex>& qs) {
  if (coded.size() != qs.size()) {
    throw InvalidSolution("coded unit and quantizer lists differ in length");
  }
  if (coded.size() < 2 || coded.front() != 1 ||
      coded.back() != inst.unit_count()) {
    throw InvalidSolution("first and last units must both be coded");
  }
  for (std::size_t i = 1; i < coded.size(); ++i) {
    if (coded[i] <= coded[i - 1]) {
      throw InvalidSolution("coded units must be strictly increasing");
    }
  }
  for (QIndex q : qs) {
    if (q < 0 || q >= inst.quantizer_count()) {
      throw InvalidSolution("quantizer index " + std::to_string(q) +
                            " out of range");
    }
  }

  RateDistortion rd;
  rd.rate = inst.intra_rate(qs[0]);
  rd.distortion = inst.intra_dist(qs[0]);
  for (std::size_t n = 1; n < coded.size(); ++n) {
    rd.rate += inst.pred_rate(coded[n], coded[n - 1], qs[n - 1], qs[n]);
    rd.distortion += inst.delta(coded[n - 1], qs[n - 1], coded[n], qs[n]);
  }
  return rd;
}

Solution make_solution(const RdInstance& inst, std::vector<Unit> coded,
                       std::vector<QIndex> qs) {
  const RateDistortion rd = evaluate_solution(inst, coded, qs);
  Solution s;
  s.coded_units = std::move(coded);
  s.quantizers = std::move(qs);
  s.total_rate = rd.rate;
  s.total_distortion = rd.distortion;
  return s;
}

std::string Violation::to_string() const {
  return table + index + ": " + problem;
}

std::vector<Violation> validate_instance(const RdInstance& inst) {
  std::vector<Violation> out;
  auto check = [&out](double value, const char* table, auto&& describe) {
    const char* problem = nullptr;
    if (std::isnan(value)) {
      problem = "missing";
    } else if (!std::isfinite(value)) {
      problem = "non-finite";
    } else if (value < 0.0) {
      problem = "negative";
    }
    if (problem != nullptr) out.push_back({table, describe(), problem});
  };

  const int nq = inst.quantizer_count();
  const int n = inst.unit_count();
  for (QIndex q = 0; q < nq; ++q) {
    auto idx = [q] { return "(q=" + std::to_string(q) + ")"; };
    check(inst.intra_rate(q), "intra_rate", idx);
    check(inst.intra_dist(q), "intra_dist", idx);
  }
  for (Unit v = 2; v <= n; ++v) {
    for (Unit vp = 1; vp < v; ++vp) {
      for (QIndex qp = 0; qp < nq; ++qp) {
        for (QIndex q = 0; q < nq; ++q) {
          auto idx = [&] {
            std::ostringstream os;
            os << "(v=" << v << ", v_prev=" << vp << ", q_prev=" << qp
               << ", q=" << q << ")";
            return os.str();
          };
          check(inst.pred_rate(v, vp, qp, q), "pred_rate", idx);
          check(inst.coded_dist(v, vp, qp, q), "coded_dist", idx);
        }
      }
    }
  }
  for (Unit left = 1; left <= n; ++left) {
    for (Unit right = left + 2; right <= n; ++right) {
      for (Unit u = left + 1; u < right; ++u) {
        for (QIndex ql = 0; ql < nq; ++ql) {
          for (QIndex qr = 0; qr < nq; ++qr) {
            auto idx = [&] {
              std::ostringstream os;
              os << "(u=" << u << ", v_left=" << left << ", v_right=" << right
                 << ", q_left=" << ql << ", q_right=" << qr << ")";
              return os.str();
            };
            check(inst.interp_dist(u, left, right, ql, qr), "interp_dist",
                  idx);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace rdalloc
