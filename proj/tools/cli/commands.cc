#include "commands.h"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "rdalloc/constrained_dp.h"
#include "rdalloc/errors.h"
#include "rdalloc/instance_gen.h"
#include "rdalloc/instance_io.h"
#include "rdalloc/lagrangian_dp.h"
#include "rdalloc/oracle.h"
#include "rdalloc/singular_search.h"
#include "report.h"
#include "verify_suite.h"

namespace rdalloc::cli {

namespace {

// Raised when an instance fails validate_instance().
class InvalidInstance : public Error {
 public:
  InvalidInstance(const std::string& what, std::vector<Violation> violations)
      : Error(what), violations_(std::move(violations)) {}
  const char* kind() const noexcept override { return "InvalidInstance"; }
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

void emit(const std::string& text, const std::string& path,
          std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

RdInstance load_valid_instance(const std::string& path) {
  RdInstance inst = load_instance(path);
  std::vector<Violation> violations = validate_instance(inst);
  if (!violations.empty()) {
    throw InvalidInstance(path + " has " + std::to_string(violations.size()) +
                              " invalid table entries",
                          std::move(violations));
  }
  return inst;
}

KnapsackSpec read_knapsack_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  try {
    const nlohmann::json j = nlohmann::json::parse(f);
    KnapsackSpec spec;
    for (const auto& item : j.at("items")) {
      spec.items.push_back({item.at("weight").get<std::int64_t>(),
                            item.at("profit").get<std::int64_t>()});
    }
    spec.capacity = j.at("capacity").get<std::int64_t>();
    if (j.contains("base_distortion")) {
      spec.base_distortion = j.at("base_distortion").get<std::int64_t>();
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

nlohmann::json search_config_json(const SearchConfig& c) {
  return {{"coarse_width", c.coarse_width},
          {"lambda_max", c.lambda_max},
          {"max_iters", c.max_iters},
          {"verify_updates", c.verify_updates}};
}

double require(const std::optional<double>& v, const char* flag,
               const std::string& method) {
  if (!v) {
    throw std::invalid_argument("--method " + method + " requires " + flag);
  }
  return *v;
}

}  // namespace

int report_error(const std::exception& e, std::ostream& err) {
  nlohmann::json j;
  int code = kExitFailure;
  if (const auto* limit = dynamic_cast<const IterationLimit*>(&e)) {
    code = kExitIterationLimit;
    j["error"] = limit->kind();
    j["partial"] = {{"iterations", limit->partial().iterations},
                    {"trace", trace_json(limit->partial().trace)}};
  } else if (const auto* bad = dynamic_cast<const InvalidInstance*>(&e)) {
    code = kExitInvalidInstance;
    j["error"] = bad->kind();
    nlohmann::json list = nlohmann::json::array();
    for (const Violation& v : bad->violations()) {
      list.push_back(
          {{"table", v.table}, {"index", v.index}, {"problem", v.problem}});
    }
    j["violations"] = list;
  } else if (const auto* lib = dynamic_cast<const Error*>(&e)) {
    j["error"] = lib->kind();
    if (dynamic_cast<const Infeasible*>(&e)) code = kExitInfeasible;
    if (dynamic_cast<const TooLarge*>(&e)) code = kExitTooLarge;
    if (dynamic_cast<const ParseError*>(&e)) code = kExitParseError;
  } else if (dynamic_cast<const std::invalid_argument*>(&e)) {
    code = kExitUsage;
    j["error"] = "InvalidArgument";
  } else {
    j["error"] = "Error";
  }
  j["message"] = e.what();
  err << j.dump() << '\n';
  return code;
}

int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const TableLayout layout =
        args.dense ? TableLayout::kDense : TableLayout::kRecords;
    if (args.kind == "synthetic") {
      const auto profile = parse_profile(args.profile);
      if (!profile) {
        throw std::invalid_argument("unknown profile '" + args.profile + "'");
      }
      const RdInstance inst =
          gen_synthetic(args.units, args.quantizers, args.seed, *profile);
      emit(dump_instance(inst, layout), args.out_path, out);
      if (!args.out_path.empty()) {
        out << nlohmann::json{{"digest", instance_digest(inst)},
                              {"unit_count", inst.unit_count()},
                              {"quantizer_count", inst.quantizer_count()}}
                   .dump()
            << '\n';
      }
      return kExitOk;
    }
    if (args.kind == "knapsack") {
      const KnapsackSpec spec =
          args.spec_path.empty()
              ? random_knapsack_spec(args.items, args.max_weight,
                                     args.max_profit, args.seed)
              : read_knapsack_spec(args.spec_path);
      const KnapsackInstance ki = gen_knapsack_instance(spec);
      emit(dump_instance(ki.instance, layout), args.out_path, out);
      if (!args.out_path.empty()) {
        out << nlohmann::json{{"digest", instance_digest(ki.instance)},
                              {"unit_count", ki.instance.unit_count()},
                              {"capacity", spec.capacity},
                              {"budget", ki.budget}}
                   .dump()
            << '\n';
      }
      return kExitOk;
    }
    throw std::invalid_argument("unknown instance kind '" + args.kind + "'");
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

nlohmann::json solve_report(const RdInstance& inst, const SolveArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json report;
  report["digest"] = instance_digest(inst);
  report["method"] = args.method;
  if (args.method == "constrained") {
    const double budget = require(args.budget, "--budget", args.method);
    report["params"] = {{"budget", budget}, {"quantum", args.quantum}};
    report["solution"] =
        solution_json(inst, solve_constrained(inst, budget, args.quantum));
  } else if (args.method == "lagrangian") {
    const double lambda = require(args.lambda, "--lambda", args.method);
    report["params"] = {{"lambda", lambda}};
    const Solution s = solve_lagrangian(inst, lambda).solution;
    report["solution"] = solution_json(inst, s);
    report["cost"] = {{"distortion", s.total_distortion},
                      {"rate", s.total_rate},
                      {"lambda_times_rate", lambda * s.total_rate},
                      {"total", lagrangian_cost(s, lambda)}};
  } else if (args.method == "search") {
    const double budget = require(args.budget, "--budget", args.method);
    SearchConfig config;
    config.max_iters = args.max_iters;
    config.verify_updates = args.verify_updates;
    report["params"] = {{"budget", budget},
                        {"lambda_init", args.lambda_init},
                        {"config", search_config_json(config)}};
    report["search"] = search_json(
        inst, search_optimal_multiplier(inst, budget, args.lambda_init,
                                        config));
  } else {
    throw std::invalid_argument("unknown method '" + args.method + "'");
  }
  report["wall_time_ms"] =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const RdInstance inst = load_valid_instance(args.instance_path);
    emit(solve_report(inst, args).dump(2) + "\n", args.out_path, out);
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const RdInstance inst = load_valid_instance(args.instance_path);
    SearchConfig config;
    config.max_iters = args.max_iters;
    config.verify_updates = args.verify_updates;
    const Staircase s =
        sweep_singular_values(inst, args.lambda_min, args.lambda_max, config);
    emit(staircase_csv(s), args.out_path, out);
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const double cap = oracle::enumeration_cap_from_env();
    std::vector<CriterionResult> results;
    if (!args.instance_path.empty()) {
      results = check_instance(load_instance(args.instance_path), cap);
    } else {
      SuiteConfig config;
      config.seed = args.seed;
      config.random_instances = args.random_instances;
      config.knapsack_specs = args.knapsack_specs;
      config.exact_specs = args.exact_specs;
      config.completeness_instances = args.completeness_instances;
      config.scale = !args.skip_scale;
      config.enum_cap = cap;
      results = run_suite(config);
    }
    int failed = 0;
    for (const CriterionResult& r : results) {
      out << format_result(r) << '\n';
      if (!r.passed) ++failed;
    }
    out << (failed == 0 ? "all checks passed"
                        : std::to_string(failed) + " check(s) failed")
        << '\n';
    if (failed == 0) return kExitOk;
    if (!args.instance_path.empty() && !results.front().passed) {
      return kExitInvalidInstance;
    }
    return kExitFailure;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

}  // namespace rdalloc::cli
