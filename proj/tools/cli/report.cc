#include "report.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include "rdalloc/errors.h"

namespace rdalloc::cli {

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

nlohmann::json solution_json(const RdInstance& inst, const Solution& s) {
  nlohmann::json labels = nlohmann::json::array();
  for (QIndex q : s.quantizers) labels.push_back(inst.quantizers().at(q));
  return {
      {"coded_units", s.coded_units},
      {"quantizer_indices", s.quantizers},
      {"quantizers", labels},
      {"rate", s.total_rate},
      {"distortion", s.total_distortion},
  };
}

nlohmann::json trace_json(const std::vector<TraceEntry>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const TraceEntry& e : trace) {
    out.push_back({{"lambda", e.lambda},
                   {"rate_lower", e.rate_lower},
                   {"rate_upper", e.rate_upper},
                   {"phase", phase_name(e.phase)}});
  }
  return out;
}

nlohmann::json search_json(const RdInstance& inst, const SearchResult& r) {
  return {
      {"lambda_star", r.lambda_star},
      {"exact", r.exact},
      {"bound", r.bound},
      {"lower", solution_json(inst, r.lower)},
      {"upper", solution_json(inst, r.upper)},
      {"counters",
       {{"iterations", r.iterations},
        {"coarse_evaluations", r.coarse_evaluations},
        {"fine_moves", r.fine_moves},
        {"idle_moves", r.idle_moves},
        {"tie_checks", r.tie_checks},
        {"tie_failures", r.tie_failures},
        {"update_checks", r.update_checks}}},
      {"trace", trace_json(r.trace)},
  };
}

std::string staircase_csv(const Staircase& staircase) {
  std::string out =
      "lambda,rate_lower,rate_upper,distortion_lower,distortion_upper\n";
  for (const StaircaseRow& row : staircase.rows) {
    out += format_number(row.lambda) + ',' +
           format_number(row.lower.total_rate) + ',' +
           format_number(row.upper.total_rate) + ',' +
           format_number(row.lower.total_distortion) + ',' +
           format_number(row.upper.total_distortion) + '\n';
  }
  return out;
}

std::vector<CsvRow> parse_staircase_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "lambda,rate_lower,rate_upper,distortion_lower,"
              "distortion_upper") {
    throw ParseError("missing staircase header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[5];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 5; ++i) {
      const auto res = std::from_chars(p, end, v[i]);
      if (res.ec != std::errc{}) throw ParseError("bad staircase row: " + line);
      p = res.ptr;
      if (i < 4) {
        if (p == end || *p != ',') {
          throw ParseError("bad staircase row: " + line);
        }
        ++p;
      }
    }
    if (p != end) throw ParseError("bad staircase row: " + line);
    rows.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return rows;
}

bool staircase_non_increasing(const std::vector<CsvRow>& rows) {
  double previous = INFINITY;
  double previous_lambda = -INFINITY;
  for (const CsvRow& row : rows) {
    if (row.lambda < previous_lambda) return false;
    if (row.rate_upper > previous || row.rate_lower > row.rate_upper) {
      return false;
    }
    previous = row.rate_lower;
    previous_lambda = row.lambda;
  }
  return true;
}

}  // namespace rdalloc::cli
