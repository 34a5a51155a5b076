#pragma once

// JSON instance files.
//
//   {
//     "unit_count": V,
//     "quantizers": [q0, q1, ...],
//     "intra":  {"rate": [...], "dist": [...]},          // by quantizer index
//     "pred":   [{"v", "v_prev", "q_prev_idx", "q_idx", "rate", "dist"}, ...],
//     "interp": [{"u", "v_left", "v_right", "q_left_idx", "q_right_idx",
//                 "dist"}, ...]
//   }
//
// "pred" and "interp" may instead be dense nested arrays:
//
//   "pred":   {"rate": R, "dist": D}   R[v-2][v_prev-1][q_prev][q]
//   "interp": {"dist": I}              I[v_left-1][v_right-v_left-2]
//                                       [u-v_left-1][q_left][q_right]
//
// Absent records (or null dense entries) load as missing.

#include <filesystem>
#include <string>
#include <string_view>

#include "rdalloc/rd_model.h"

namespace rdalloc {

enum class TableLayout { kRecords, kDense };

/// Throws ParseError on malformed input.
RdInstance parse_instance(std::string_view json_text);
RdInstance load_instance(const std::filesystem::path& path);

/// Serializes with a trailing newline. Integral values are written as JSON
/// integers so generated files stay diff-friendly.
std::string dump_instance(const RdInstance& inst,
                          TableLayout layout = TableLayout::kRecords);
void save_instance(const RdInstance& inst, const std::filesystem::path& path,
                   TableLayout layout = TableLayout::kRecords);

/// 64-bit FNV-1a over the table contents, as 16 hex digits. Independent of
/// the file layout the instance was loaded from.
std::string instance_digest(const RdInstance& inst);

}  // namespace rdalloc
