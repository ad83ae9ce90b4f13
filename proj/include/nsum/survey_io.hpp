#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsum/model.hpp"

namespace nsum {

/// Maps survey CSV columns to model roles.
///
/// JSON shape:
///   {"known": [{"column": "...", "size": N_k}, ...],
///    "unknown": ["...", ...],
///    "weight": "..." (optional),
///    "id": "..." (optional respondent label column),
///    "total_population": N}
struct SurveySchema {
  struct KnownColumn {
    std::string column;
    double size;
  };
  std::vector<KnownColumn> known;
  std::vector<std::string> unknown;
  std::optional<std::string> weight;
  std::optional<std::string> id;
  double total_population = 0.0;
};

SurveySchema parse_schema(const std::string& json_text);
SurveySchema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const SurveySchema& schema);

/// Reads one row per respondent. Columns not named by the schema are ignored.
/// Throws CellError with (row, column) for negative, non-integer or missing
/// counts, and ValidationError for schema columns absent from the header.
SurveyData read_survey_csv(std::istream& in, const SurveySchema& schema);
SurveyData load_survey_csv(const std::filesystem::path& path, const SurveySchema& schema);

/// Schema that reproduces `data` through write_survey_csv.
SurveySchema schema_for(const SurveyData& data);
void write_survey_csv(std::ostream& out, const SurveyData& data);
void export_survey(const SurveyData& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& schema_path);

/// Splits one CSV record; supports double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

} // namespace nsum
