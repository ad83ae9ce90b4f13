#pragma once

#include <filesystem>
#include <iosfwd>

#include "nsum/draws.hpp"
#include "nsum/model.hpp"

namespace nsum {

enum class DrawFormat { csv, jsonl };

/// Writes one record per (chain, iteration, parameter).
///
/// CSV: `#`-prefixed metadata lines, then the header
/// `chain,iteration,parameter,value`. JSONL: a {"meta": ...} line, then one
/// {"chain","iteration","parameter","value"} object per line. Values are
/// written in shortest round-trip form, so reading back is exact.
void write_draws(std::ostream& out, const DrawMatrix& draws, DrawFormat format);
void export_draws(const DrawMatrix& draws, const std::filesystem::path& path, DrawFormat format);

DrawMatrix read_draws(std::istream& in, DrawFormat format);
/// Format chosen by extension: `.jsonl` is JSONL, anything else CSV.
DrawMatrix import_draws(const std::filesystem::path& path);

/// Violin-plot input: per unknown population the size draws N * theta
/// (kind `draw`) followed by the 1%..99% quantile grid (kinds `q01`..`q99`).
/// Header: `population,draw_or_quantile_kind,value`.
void write_plotdata(std::ostream& out, const DrawMatrix& draws, const SurveyData& data);
void export_plotdata(const DrawMatrix& draws, const SurveyData& data, const std::filesystem::path& path);

} // namespace nsum
