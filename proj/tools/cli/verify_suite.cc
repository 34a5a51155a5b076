#include "verify_suite.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <utility>

#include "rdalloc/constrained_dp.h"
#include "rdalloc/errors.h"
#include "rdalloc/instance_gen.h"
#include "rdalloc/lagrangian_dp.h"
#include "rdalloc/singular_search.h"
#include "report.h"

namespace rdalloc::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Modulo draw; the small bias is irrelevant and the output is portable.
std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

using RdSet = std::set<std::pair<double, double>>;

RdSet staircase_points(const Staircase& s) {
  RdSet out;
  for (const StaircaseRow& row : s.rows) {
    out.insert({row.lower.total_rate, row.lower.total_distortion});
    out.insert({row.upper.total_rate, row.upper.total_distortion});
  }
  return out;
}

RdSet plateau_points(const std::vector<oracle::Plateau>& plateaus) {
  RdSet out;
  for (const oracle::Plateau& p : plateaus) {
    out.insert({p.point.rate, p.point.distortion});
  }
  return out;
}

SearchConfig checked_config() {
  SearchConfig c;
  c.verify_updates = true;
  c.check_ties = true;
  return c;
}

// Shared tallies for the update-soundness and owner-tie criteria.
struct MoveTally {
  long update_checks = 0;
  long divergences = 0;
  long tie_checks = 0;
  long tie_failures = 0;
  std::string first_divergence;

  void add(const SearchResult& r) {
    update_checks += r.update_checks;
    tie_checks += r.tie_checks;
    tie_failures += r.tie_failures;
  }
  void add(const Staircase& s) {
    update_checks += s.update_checks;
    tie_checks += s.tie_checks;
    tie_failures += s.tie_failures;
  }
  void diverged(const ConsistencyError& e) {
    ++divergences;
    if (first_divergence.empty()) first_divergence = e.what();
  }
};

// Counts cases and keeps the first failure message.
struct Tally {
  int cases = 0;
  int failures = 0;
  std::string first;

  void fail(const std::string& what) {
    ++failures;
    if (first.empty()) first = what;
  }
  std::string summary() const {
    std::string s = std::to_string(cases - failures) + "/" +
                    std::to_string(cases) + " agree";
    if (!first.empty()) s += "; first mismatch: " + first;
    return s;
  }
};

std::string fmt(double v) { return format_number(v); }

std::string rd(const Solution& s) {
  return "(R=" + fmt(s.total_rate) + ", D=" + fmt(s.total_distortion) + ")";
}

KnapsackSpec suite_knapsack_spec(std::uint64_t seed, int index) {
  std::mt19937_64 rng(mix(seed, 1'000'000 + index));
  const int items = static_cast<int>(draw(rng, 1, 12));
  return random_knapsack_spec(items, 10, 10, rng());
}

double min_rate(const RdInstance& inst) {
  return solve_min_rate(inst).total_rate;
}

}  // namespace

RdInstance gen_uniform(int unit_count, int quantizer_count,
                       std::uint64_t seed, int max_rate, int max_dist) {
  std::mt19937_64 rng(seed);
  std::vector<int> labels;
  for (int q = 0; q < quantizer_count; ++q) labels.push_back(q);
  InstanceBuilder b(unit_count, labels);
  auto r = [&] { return static_cast<double>(draw(rng, 0, max_rate)); };
  auto d = [&] { return static_cast<double>(draw(rng, 0, max_dist)); };
  for (QIndex q = 0; q < quantizer_count; ++q) {
    const double rate = r();
    b.set_intra(q, rate, d());
  }
  for (Unit v = 2; v <= unit_count; ++v) {
    for (Unit vp = 1; vp < v; ++vp) {
      for (QIndex qp = 0; qp < quantizer_count; ++qp) {
        for (QIndex q = 0; q < quantizer_count; ++q) {
          const double rate = r();
          b.set_pred(v, vp, qp, q, rate, d());
        }
      }
    }
  }
  for (Unit vl = 1; vl <= unit_count; ++vl) {
    for (Unit vr = vl + 2; vr <= unit_count; ++vr) {
      for (Unit u = vl + 1; u < vr; ++u) {
        for (QIndex ql = 0; ql < quantizer_count; ++ql) {
          for (QIndex qr = 0; qr < quantizer_count; ++qr) {
            b.set_interp(u, vl, vr, ql, qr, d());
          }
        }
      }
    }
  }
  return std::move(b).build();
}

SuiteInstance suite_instance(std::uint64_t seed, int index) {
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(index)));
  const int units = static_cast<int>(draw(rng, 3, 6));
  const int qs = static_cast<int>(draw(rng, 2, 3));
  const std::uint64_t sub = rng();
  RdInstance inst = index % 2 == 0
                        ? gen_uniform(units, qs, sub)
                        : gen_synthetic(units, qs, sub,
                                        SyntheticProfile::kPerturbed);
  const auto lo = static_cast<std::int64_t>(std::ceil(min_rate(inst)));
  const auto hi = static_cast<std::int64_t>(
      std::floor(solve_lagrangian(inst, 0.0).solution.total_rate));
  const double budget = static_cast<double>(draw(rng, lo, std::max(lo, hi)));
  return {std::move(inst), budget};
}

namespace {

template <typename Fn>
CriterionResult timed(int id, std::string name, Fn&& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  const auto start = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("aborted: ") + e.what();
  }
  r.seconds = seconds_since(start);
  return r;
}

// Search, then check R(lower) <= B <= R(upper) and the gap bound against the
// brute-force optimum.
void check_bracket(const RdInstance& inst, double budget, double cap,
                   Tally& t, MoveTally& moves) {
  ++t.cases;
  const Solution best = oracle::brute_force(inst, budget, cap);
  SearchResult r;
  try {
    r = search_optimal_multiplier(inst, budget, 1.0, checked_config());
  } catch (const ConsistencyError& e) {
    moves.diverged(e);
    t.fail(std::string("search: ") + e.what());
    return;
  }
  moves.add(r);
  const bool brackets =
      r.lower.total_rate <= budget && budget <= r.upper.total_rate;
  const double gap =
      std::fabs(r.lower.total_distortion - r.upper.total_distortion);
  const double err =
      std::fabs(r.lower.total_distortion - best.total_distortion);
  if (!brackets || err > gap) {
    t.fail("B=" + fmt(budget) + " lower " + rd(r.lower) + " upper " +
           rd(r.upper) + " optimum " + rd(best));
  }
}

void check_completeness(const RdInstance& inst, double cap, Tally& t,
                        MoveTally& moves) {
  ++t.cases;
  Staircase s;
  try {
    s = sweep_singular_values(inst, 0.0, INFINITY, checked_config());
  } catch (const ConsistencyError& e) {
    moves.diverged(e);
    t.fail(std::string("sweep: ") + e.what());
    return;
  }
  moves.add(s);
  const oracle::SweepRange range = oracle::sweep_range(inst, cap);
  const RdSet reference = plateau_points(oracle::convex_hull_sweep(
      inst, 0.0, range.lambda_hi, range.resolution, cap));
  const RdSet marched = staircase_points(s);
  if (reference != marched) {
    t.fail("marching found " + std::to_string(marched.size()) +
           " (R, D) pairs, grid found " + std::to_string(reference.size()));
  }
}

bool staircase_monotone(const RdInstance& inst) {
  const Staircase s = sweep_singular_values(inst, 0.0);
  return staircase_non_increasing(parse_staircase_csv(staircase_csv(s)));
}

}  // namespace

std::vector<CriterionResult> run_suite(const SuiteConfig& config) {
  const double cap = config.enum_cap;
  std::vector<SuiteInstance> random;
  for (int i = 0; i < config.random_instances; ++i) {
    random.push_back(suite_instance(config.seed, i));
  }
  std::vector<KnapsackSpec> specs;
  for (int i = 0; i < config.knapsack_specs; ++i) {
    specs.push_back(suite_knapsack_spec(config.seed, i));
  }
  MoveTally moves;
  std::vector<CriterionResult> out;

  out.push_back(timed(1, "oracle equivalence, constrained", [&](auto& r) {
    Tally t;
    for (const SuiteInstance& si : random) {
      ++t.cases;
      const Solution dp = solve_constrained(si.instance, si.budget, 1.0);
      const Solution bf = oracle::brute_force(si.instance, si.budget, cap);
      if (dp.total_distortion != bf.total_distortion) {
        t.fail("B=" + fmt(si.budget) + " dp " + rd(dp) + " brute " + rd(bf));
      }
    }
    r.detail = t.summary();
    r.passed = t.failures == 0 && t.cases >= 200;
  }));
  out.back().passed = out.back().passed && out.back().seconds < 60.0;

  out.push_back(timed(2, "oracle equivalence, Lagrangian", [&](auto& r) {
    Tally t;
    for (const SuiteInstance& si : random) {
      for (double lambda : {0.0, 0.5, 1.0, 2.0, 10.0}) {
        ++t.cases;
        const Solution dp = solve_lagrangian(si.instance, lambda).solution;
        const Solution bf = oracle::lagrangian_brute(si.instance, lambda, cap);
        if (lagrangian_cost(dp, lambda) != lagrangian_cost(bf, lambda)) {
          t.fail("lambda=" + fmt(lambda) + " dp " + rd(dp) + " brute " +
                 rd(bf));
        }
      }
    }
    r.detail = t.summary();
    r.passed = t.failures == 0 && !random.empty();
  }));

  out.push_back(timed(3, "knapsack reduction", [&](auto& r) {
    Tally constrained;
    Tally search;
    for (const KnapsackSpec& spec : specs) {
      const KnapsackInstance ki = gen_knapsack_instance(spec);
      const double expected =
          static_cast<double>(spec.items.size()) *
              static_cast<double>(spec.effective_base_distortion()) -
          static_cast<double>(oracle::knapsack_solve(spec));
      ++constrained.cases;
      const Solution dp = solve_constrained(ki.instance, ki.budget, 1.0);
      if (dp.total_distortion != expected) {
        constrained.fail("W=" + std::to_string(spec.capacity) + " dp " +
                         rd(dp) + " expected D=" + fmt(expected));
      }
      ++search.cases;
      const SearchResult s =
          search_optimal_multiplier(ki.instance, ki.budget, 1.0);
      if (s.lower.total_distortion != expected) {
        search.fail("W=" + std::to_string(spec.capacity) + " lower " +
                    rd(s.lower) + " upper " + rd(s.upper) + " expected D=" +
                    fmt(expected));
      }
    }
    r.detail = "constrained " + constrained.summary() + " | search " +
               search.summary();
    r.passed = constrained.failures == 0 && search.failures == 0 &&
               specs.size() >= 50;
  }));

  out.push_back(timed(4, "bracketing and gap bound", [&](auto& r) {
    Tally t;
    for (const SuiteInstance& si : random) {
      check_bracket(si.instance, si.budget, cap, t, moves);
    }
    r.detail = t.summary();
    r.passed = t.failures == 0 && !random.empty();
  }));

  out.push_back(timed(5, "exact-budget optimality", [&](auto& r) {
    Tally t;
    int exact_hits = 0;
    for (int i = 0; i < config.exact_specs; ++i) {
      std::mt19937_64 rng(mix(config.seed, 2'000'000 + i));
      KnapsackSpec spec = suite_knapsack_spec(config.seed, 5'000 + i);
      const KnapsackInstance ki = gen_knapsack_instance(spec);
      const double lambda =
          0.05 + static_cast<double>(draw(rng, 0, 1000)) / 500.0;
      const double budget =
          solve_lagrangian(ki.instance, lambda).solution.total_rate;
      spec.capacity = static_cast<std::int64_t>(budget) - 2;
      const double knapsack_d =
          static_cast<double>(spec.items.size()) *
              static_cast<double>(spec.effective_base_distortion()) -
          static_cast<double>(oracle::knapsack_solve(spec));
      ++t.cases;
      SearchResult s;
      try {
        s = search_optimal_multiplier(ki.instance, budget, 1.0,
                                      checked_config());
      } catch (const ConsistencyError& e) {
        moves.diverged(e);
        t.fail(std::string("search: ") + e.what());
        continue;
      }
      moves.add(s);
      if (s.exact) ++exact_hits;
      const Solution dp = solve_constrained(ki.instance, budget, 1.0);
      const Solution bf = oracle::brute_force(ki.instance, budget, cap);
      if (!s.exact || s.lower.total_distortion != dp.total_distortion ||
          dp.total_distortion != bf.total_distortion ||
          bf.total_distortion != knapsack_d) {
        t.fail("B=" + fmt(budget) + " search " + rd(s.lower) +
               (s.exact ? "" : " (not exact)") + " constrained " + rd(dp) +
               " brute " + rd(bf) + " knapsack D=" + fmt(knapsack_d));
      }
    }
    r.detail = t.summary() + ", " + std::to_string(exact_hits) +
               " flagged exact";
    r.passed = t.failures == 0 && t.cases > 0;
  }));

  out.push_back(timed(6, "singular-value completeness", [&](auto& r) {
    Tally t;
    const int n = std::min<int>(config.completeness_instances,
                                static_cast<int>(random.size()));
    for (int i = 0; i < n; ++i) {
      check_completeness(random[static_cast<std::size_t>(i)].instance, cap, t,
                         moves);
    }
    r.detail = t.summary();
    r.passed = t.failures == 0 && t.cases >= std::min(50, n) && n > 0;
  }));

  out.push_back(timed(7, "incremental-update soundness", [&](auto& r) {
    r.detail = std::to_string(moves.update_checks) +
               " moves checked against full recompute, " +
               std::to_string(moves.divergences) + " diverged";
    if (!moves.first_divergence.empty()) {
      r.detail += "; first: " + moves.first_divergence;
    }
    r.passed = moves.divergences == 0 && moves.update_checks > 0;
  }));

  out.push_back(timed(8, "tie at the owner after every move", [&](auto& r) {
    r.detail = std::to_string(moves.tie_checks) + " moves checked, " +
               std::to_string(moves.tie_failures) + " without a tie";
    r.passed = moves.tie_failures == 0 && moves.tie_checks > 0;
  }));

  out.push_back(timed(9, "staircase monotonicity", [&](auto& r) {
    Tally t;
    auto check = [&](const RdInstance& inst, const std::string& label) {
      ++t.cases;
      if (!staircase_monotone(inst)) t.fail(label);
    };
    for (std::size_t i = 0; i < random.size(); ++i) {
      check(random[i].instance, "random #" + std::to_string(i));
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
      check(gen_knapsack_instance(specs[i]).instance,
            "knapsack #" + std::to_string(i));
    }
    r.detail = t.summary();
    r.passed = t.failures == 0 && t.cases > 0;
  }));

  if (config.scale) {
    out.push_back(timed(10, "scale smoke test", [&](auto& r) {
      const int q = 27;
      const int sizes[] = {10, 20, 30};
      double work[3];
      double secs[3];
      int iters[3];
      for (int k = 0; k < 3; ++k) {
        const RdInstance inst = gen_synthetic(sizes[k], q, config.seed,
                                              SyntheticProfile::kPerturbed);
        const double lo = min_rate(inst);
        const double hi = solve_lagrangian(inst, 0.0).solution.total_rate;
        const double budget = std::floor(0.5 * (lo + hi));
        double best = INFINITY;
        for (int rep = 0; rep < 3; ++rep) {
          const auto start = Clock::now();
          const SearchResult s = search_optimal_multiplier(inst, budget);
          best = std::min(best, seconds_since(start));
          iters[k] = s.iterations;
        }
        secs[k] = best;
        const double v = sizes[k];
        work[k] = static_cast<double>(iters[k]) * v * v * q * q;
      }
      // Least-squares fit t = c * m V^2 Q^2 through the origin.
      double num = 0.0;
      double den = 0.0;
      for (int k = 0; k < 3; ++k) {
        num += secs[k] * work[k];
        den += work[k] * work[k];
      }
      const double c = num / den;
      bool trend_ok = true;
      std::string ratios;
      for (int k = 0; k < 3; ++k) {
        const double ratio = secs[k] / (c * work[k]);
        if (!(ratio >= 1.0 / 3.0 && ratio <= 3.0)) trend_ok = false;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sV=%d: m=%d, %.4f s, ratio %.2f",
                      k ? "; " : "", sizes[k], iters[k], secs[k], ratio);
        ratios += buf;
      }
      r.detail = ratios;
      r.passed = secs[2] < 5.0 && trend_ok;
    }));
  }
  return out;
}

std::vector<CriterionResult> check_instance(const RdInstance& inst,
                                            double enum_cap) {
  std::vector<CriterionResult> out;
  const std::vector<Violation> violations = validate_instance(inst);
  {
    CriterionResult r;
    r.id = 0;
    r.name = "instance validation";
    r.passed = violations.empty();
    r.detail = std::to_string(violations.size()) + " violations";
    for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
      r.detail += (i ? "; " : ": ") + violations[i].to_string();
    }
    out.push_back(r);
  }
  if (!violations.empty()) return out;
  if (oracle::enumeration_count(inst) > enum_cap) {
    CriterionResult r;
    r.id = 0;
    r.name = "oracle checks";
    r.passed = true;
    r.detail = "skipped: instance exceeds the enumeration cap";
    out.push_back(r);
    return out;
  }

  bool integral = true;
  for (Unit v = 2; v <= inst.unit_count(); ++v) {
    for (Unit vp = 1; vp < v; ++vp) {
      for (QIndex qp = 0; qp < inst.quantizer_count(); ++qp) {
        for (QIndex q = 0; q < inst.quantizer_count(); ++q) {
          const double x = inst.pred_rate(v, vp, qp, q);
          if (x != std::floor(x)) integral = false;
        }
      }
    }
  }
  for (QIndex q = 0; q < inst.quantizer_count(); ++q) {
    if (inst.intra_rate(q) != std::floor(inst.intra_rate(q))) integral = false;
  }

  const double lo = min_rate(inst);
  const double hi = solve_lagrangian(inst, 0.0).solution.total_rate;
  const std::vector<double> budgets = {lo, std::floor(0.5 * (lo + hi)), hi};
  MoveTally moves;

  out.push_back(timed(1, "constrained DP vs brute force", [&](auto& r) {
    if (!integral) {
      r.passed = true;
      r.detail = "skipped: rates are not integers";
      return;
    }
    Tally t;
    for (double b : budgets) {
      ++t.cases;
      const Solution dp = solve_constrained(inst, b, 1.0);
      const Solution bf = oracle::brute_force(inst, b, enum_cap);
      if (dp.total_distortion != bf.total_distortion) {
        t.fail("B=" + fmt(b) + " dp " + rd(dp) + " brute " + rd(bf));
      }
    }
    r.detail = t.summary();
    r.passed = t.failures == 0;
  }));
  out.push_back(timed(2, "Lagrangian DP vs brute force", [&](auto& r) {
    Tally t;
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 10.0}) {
      ++t.cases;
      const Solution dp = solve_lagrangian(inst, lambda).solution;
      const Solution bf = oracle::lagrangian_brute(inst, lambda, enum_cap);
      const double a = lagrangian_cost(dp, lambda);
      const double b = lagrangian_cost(bf, lambda);
      if (!(integral ? a == b : costs_tie(a, b))) {
        t.fail("lambda=" + fmt(lambda) + " dp " + rd(dp) + " brute " +
               rd(bf));
      }
    }
    r.detail = t.summary();
    r.passed = t.failures == 0;
  }));
  out.push_back(timed(4, "bracketing and gap bound", [&](auto& r) {
    Tally t;
    for (double b : budgets) check_bracket(inst, b, enum_cap, t, moves);
    r.detail = t.summary();
    r.passed = t.failures == 0;
  }));
  out.push_back(timed(6, "singular-value completeness", [&](auto& r) {
    Tally t;
    check_completeness(inst, enum_cap, t, moves);
    r.detail = t.summary();
    r.passed = t.failures == 0;
  }));
  out.push_back(timed(7, "incremental-update soundness", [&](auto& r) {
    r.detail = std::to_string(moves.update_checks) + " moves checked, " +
               std::to_string(moves.divergences) + " diverged";
    r.passed = moves.divergences == 0;
  }));
  out.push_back(timed(8, "tie at the owner after every move", [&](auto& r) {
    r.detail = std::to_string(moves.tie_checks) + " moves checked, " +
               std::to_string(moves.tie_failures) + " without a tie";
    r.passed = moves.tie_failures == 0;
  }));
  out.push_back(timed(9, "staircase monotonicity", [&](auto& r) {
    r.passed = staircase_monotone(inst);
    r.detail = r.passed ? "non-increasing" : "rate increases with lambda";
  }));
  return out;
}

std::string format_result(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f s", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + "  [" +
         std::to_string(r.id) + "] " + r.name + ": " + r.detail + " (" +
         secs + ")";
}

}  // namespace rdalloc::cli
