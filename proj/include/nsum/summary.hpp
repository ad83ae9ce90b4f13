#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsum/diagnostics.hpp"
#include "nsum/draws.hpp"
#include "nsum/model.hpp"

namespace nsum {

/// Type-7 (linear interpolation) quantile of already sorted values.
double quantile_sorted(std::span<const double> sorted, double probability);

struct IntervalSummary {
  double mean;
  double median;
  double lower;
  double upper;
};

struct PopulationSummary {
  std::string label;
  IntervalSummary frequency;
  IntervalSummary size;  // N times each frequency field
};

/// Posterior summary of one run. Intervals are central with the given level.
struct SummaryDocument {
  double level = 0.95;
  double total_population = 0.0;
  std::vector<PopulationSummary> populations;
  std::vector<double> degree_means;  // posterior mean per respondent
  double mean_degree = 0.0;          // average of degree_means
  double min_degree_mean = 0.0;
  double max_degree_mean = 0.0;
  DrawMetadata metadata;
  std::size_t draws = 0;
};

/// Throws ValidationError for empty draws or a level outside [0, 1).
/// Independent of draw order: means are accumulated over sorted values.
SummaryDocument summarize(const DrawMatrix& draws, const SurveyData& data, double level = 0.95);

/// JSON text of the summary, with the diagnostics report embedded when given.
std::string summary_to_json(const SummaryDocument& summary, const DiagnosticsReport* diagnostics = nullptr);

std::string diagnostics_to_json(const DiagnosticsReport& report, const DrawMetadata& metadata);

} // namespace nsum
