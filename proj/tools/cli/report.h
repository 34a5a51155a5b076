#pragma once

// JSON and CSV renderings shared by the command handlers and the tests.

#include <string>

#include <nlohmann/json.hpp>

#include "rdalloc/rd_model.h"
#include "rdalloc/singular_search.h"

namespace rdalloc::cli {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

nlohmann::json solution_json(const RdInstance& inst, const Solution& s);

nlohmann::json trace_json(const std::vector<TraceEntry>& trace);

/// Search outcome with counters and the full trace.
nlohmann::json search_json(const RdInstance& inst, const SearchResult& r);

/// R-vs-lambda staircase, one row per singular value.
/// Columns: lambda,rate_lower,rate_upper,distortion_lower,distortion_upper
std::string staircase_csv(const Staircase& staircase);

struct CsvRow {
  double lambda = 0.0;
  double rate_lower = 0.0;
  double rate_upper = 0.0;
  double distortion_lower = 0.0;
  double distortion_upper = 0.0;
};

/// Parses staircase_csv output. Throws ParseError on malformed rows.
std::vector<CsvRow> parse_staircase_csv(const std::string& text);

/// True if the rates never increase when reading the staircase by
/// increasing lambda, each row contributing its upper rate before its lower.
bool staircase_non_increasing(const std::vector<CsvRow>& rows);

}  // namespace rdalloc::cli
