#include "rdalloc/instance_gen.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace rdalloc {

namespace {

// std::uniform_*_distribution output differs between standard libraries;
// these helpers only rely on the engine's specified sequence.
std::int64_t draw_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * draw_unit(rng);
}

double nonneg_round(double x) { return std::max(0.0, std::round(x)); }

}  // namespace

std::int64_t KnapsackSpec::effective_base_distortion() const {
  if (base_distortion) return *base_distortion;
  std::int64_t max_profit = 0;
  for (const auto& item : items) max_profit = std::max(max_profit, item.profit);
  return max_profit + 1;
}

KnapsackInstance gen_knapsack_instance(const KnapsackSpec& spec) {
  if (spec.capacity < 0) {
    throw std::invalid_argument("knapsack capacity must be nonnegative");
  }
  const std::int64_t base = spec.effective_base_distortion();
  for (std::size_t m = 0; m < spec.items.size(); ++m) {
    const auto& item = spec.items[m];
    if (item.weight < 0 || item.profit < 0) {
      throw std::invalid_argument("item " + std::to_string(m) +
                                  " has a negative weight or profit");
    }
    if (item.profit >= base) {
      throw std::invalid_argument(
          "base distortion must exceed every profit (item " +
          std::to_string(m) + ")");
    }
  }

  const int n = static_cast<int>(spec.items.size()) + 2;
  const double d = static_cast<double>(base);
  InstanceBuilder b(n, {0});
  b.set_intra(0, 1.0, 0.0);
  for (Unit v = 2; v <= n; ++v) {
    double rate = 1.0;
    double dist = 0.0;
    if (v < n) {
      const auto& item = spec.items[static_cast<std::size_t>(v - 2)];
      rate = static_cast<double>(item.weight);
      dist = d - static_cast<double>(item.profit);
    }
    for (Unit vp = 1; vp < v; ++vp) b.set_pred(v, vp, 0, 0, rate, dist);
  }
  for (Unit left = 1; left <= n; ++left) {
    for (Unit right = left + 2; right <= n; ++right) {
      for (Unit u = left + 1; u < right; ++u) {
        b.set_interp(u, left, right, 0, 0, d);
      }
    }
  }
  return {std::move(b).build(), static_cast<double>(spec.capacity) + 2.0};
}

std::optional<SyntheticProfile> parse_profile(std::string_view name) {
  if (name == "convex") return SyntheticProfile::kConvex;
  if (name == "perturbed") return SyntheticProfile::kPerturbed;
  return std::nullopt;
}

std::string_view profile_name(SyntheticProfile profile) {
  return profile == SyntheticProfile::kConvex ? "convex" : "perturbed";
}

RdInstance gen_synthetic(int unit_count, int quantizer_count,
                         std::uint64_t seed, SyntheticProfile profile) {
  if (unit_count < 2) throw std::invalid_argument("unit_count must be >= 2");
  if (quantizer_count < 1) {
    throw std::invalid_argument("quantizer_count must be >= 1");
  }
  if (quantizer_count > 40) {
    throw std::invalid_argument("quantizer_count must be <= 40");
  }
  std::mt19937_64 rng(seed);
  const bool perturbed = profile == SyntheticProfile::kPerturbed;
  const int n = unit_count;
  const int nq = quantizer_count;
  const double qspan = std::max(1, nq - 1);

  // Unpredicted operating points per (unit, quantizer).
  std::vector<double> rate(static_cast<std::size_t>((n + 1) * nq));
  std::vector<double> dist(rate.size());
  std::vector<double> slope(static_cast<std::size_t>(n + 1));
  std::vector<double> interp_weight(static_cast<std::size_t>(n + 1));
  auto at = [nq](Unit v, QIndex q) {
    return static_cast<std::size_t>(v * nq + q);
  };
  for (Unit v = 1; v <= n; ++v) {
    const double top_rate =
        std::ldexp(static_cast<double>(draw_int(rng, 16, 32)), nq - 1);
    const double d0 = static_cast<double>(draw_int(rng, 4, 12));
    slope[static_cast<std::size_t>(v)] = static_cast<double>(draw_int(rng, 4, 10));
    interp_weight[static_cast<std::size_t>(v)] =
        static_cast<double>(draw_int(rng, 2, 8));
    for (QIndex q = 0; q < nq; ++q) {
      double r = std::ldexp(top_rate, -q);
      double d = d0 + slope[static_cast<std::size_t>(v)] * q;
      if (perturbed) {
        r *= draw_real(rng, 0.7, 1.3);
        d += draw_real(rng, -0.75, 0.75) * slope[static_cast<std::size_t>(v)];
      }
      rate[at(v, q)] = nonneg_round(r);
      dist[at(v, q)] = nonneg_round(d);
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) labels[static_cast<std::size_t>(q)] = 25 + q;
  InstanceBuilder b(n, std::move(labels));

  for (QIndex q = 0; q < nq; ++q) {
    b.set_intra(q, 2.0 * rate[at(1, q)], dist[at(1, q)]);
  }
  for (Unit v = 2; v <= n; ++v) {
    const double s = slope[static_cast<std::size_t>(v)];
    for (Unit vp = 1; vp < v; ++vp) {
      const double gap_factor = 1.0 + 0.25 * (v - vp - 1);
      for (QIndex qp = 0; qp < nq; ++qp) {
        const double ref_quality = qp / qspan;  // 0 = finest reference
        for (QIndex q = 0; q < nq; ++q) {
          double r = rate[at(v, q)] * gap_factor * (1.0 + 0.5 * ref_quality);
          double d = dist[at(v, q)] + 0.5 * s * ref_quality + (v - vp - 1);
          if (perturbed) {
            r *= draw_real(rng, 0.9, 1.1);
            d += draw_real(rng, -0.25, 0.25) * s;
          }
          b.set_pred(v, vp, qp, q, nonneg_round(r), nonneg_round(d));
        }
      }
    }
  }
  for (Unit left = 1; left <= n; ++left) {
    for (Unit right = left + 2; right <= n; ++right) {
      for (Unit u = left + 1; u < right; ++u) {
        const double w = interp_weight[static_cast<std::size_t>(u)];
        for (QIndex ql = 0; ql < nq; ++ql) {
          for (QIndex qr = 0; qr < nq; ++qr) {
            double d = w * (right - left) +
                       0.5 * (dist[at(left, ql)] + dist[at(right, qr)]);
            if (perturbed) d += draw_real(rng, -0.5, 0.5) * w;
            b.set_interp(u, left, right, ql, qr, nonneg_round(d));
          }
        }
      }
    }
  }
  return std::move(b).build();
}

KnapsackSpec random_knapsack_spec(int item_count, std::int64_t max_weight,
                                  std::int64_t max_profit, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  KnapsackSpec spec;
  std::int64_t total = 0;
  for (int m = 0; m < item_count; ++m) {
    KnapsackItem item;
    item.weight = draw_int(rng, 1, max_weight);
    item.profit = draw_int(rng, 0, max_profit);
    total += item.weight;
    spec.items.push_back(item);
  }
  spec.capacity = draw_int(rng, 0, total);
  return spec;
}

}  // namespace rdalloc
