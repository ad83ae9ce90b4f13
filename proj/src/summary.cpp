#include "nsum/summary.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "nsum/errors.hpp"

namespace nsum {

using json = nlohmann::json;

double quantile_sorted(std::span<const double> sorted, double probability) {
  if (sorted.empty()) throw ValidationError("quantile of no values");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * probability;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

double sorted_mean(std::span<const double> sorted) {
  double total = 0.0;
  for (double v : sorted) total += v;
  return total / static_cast<double>(sorted.size());
}

IntervalSummary interval_of(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  return {sorted_mean(values), quantile_sorted(values, 0.5), quantile_sorted(values, 0.5 * (1.0 - level)),
          quantile_sorted(values, 0.5 * (1.0 + level))};
}

IntervalSummary scaled(const IntervalSummary& s, double factor) {
  return {factor * s.mean, factor * s.median, factor * s.lower, factor * s.upper};
}

json metadata_json(const DrawMetadata& meta) {
  json j;
  j["engine"] = std::string(engine_name(meta.engine));
  j["seed"] = meta.seed;
  j["config_hash"] = meta.config_hash;
  j["iterations"] = meta.iterations;
  j["burn_in"] = meta.burn_in;
  j["thin"] = meta.thin;
  j["seconds"] = meta.seconds;
  j["warnings"] = meta.warnings;
  if (!meta.acceptance_rates.empty()) {
    double total = 0.0;
    for (double r : meta.acceptance_rates) total += r;
    j["mean_acceptance"] = total / static_cast<double>(meta.acceptance_rates.size());
    j["acceptance_rates"] = meta.acceptance_rates;
  }
  return j;
}

json outcome_json(const Outcome& o) {
  if (o.ok()) return o.value;
  return json{{"status", std::string(status_name(o.status))}, {"note", o.note}};
}

json diagnostics_json(const DiagnosticsReport& report) {
  json j;
  j["chains"] = report.chains;
  j["draws_per_chain"] = report.draws_per_chain;
  j["thresholds"] = {{"rhat_max", report.thresholds.rhat_max},
                     {"geweke_alpha", report.thresholds.geweke_alpha},
                     {"geweke_critical", report.geweke_critical},
                     {"dependence_factor_max", report.thresholds.dependence_factor_max},
                     {"geweke_first_frac", report.thresholds.first_frac},
                     {"geweke_last_frac", report.thresholds.last_frac},
                     {"raftery_lewis",
                      {{"q", report.thresholds.raftery_lewis.quantile},
                       {"r", report.thresholds.raftery_lewis.accuracy},
                       {"s", report.thresholds.raftery_lewis.probability}}}};
  j["rhat_available"] = report.chains >= 2;
  j["flagged"] = report.flagged();
  j["flagged_parameters"] = report.flagged_parameters();
  if (report.max_required) {
    j["raftery_lewis_max_required"] = {{"draws", *report.max_required},
                                       {"parameter", *report.max_required_parameter}};
  }
  j["parameters"] = json::array();
  for (const auto& p : report.parameters) {
    json pj;
    pj["name"] = p.name;
    pj["rhat"] = outcome_json(p.rhat);
    pj["rhat_raw"] = outcome_json(p.rhat_raw);
    pj["geweke"] = json::array();
    for (const auto& g : p.geweke) pj["geweke"].push_back(outcome_json(g));
    pj["ess"] = outcome_json(p.ess);
    pj["autocorrelation"] = json::object();
    for (std::size_t l = 0; l < p.autocorrelations.size(); ++l) {
      pj["autocorrelation"][std::to_string(report.thresholds.lags[l])] = outcome_json(p.autocorrelations[l]);
    }
    pj["raftery_lewis"] = json::array();
    for (const auto& rl : p.raftery_lewis) {
      json r;
      r["status"] = std::string(status_name(rl.status));
      r["n_min"] = rl.result.min_draws;
      if (rl.status == DiagnosticStatus::ok) {
        r["burn_in"] = rl.result.burn_in;
        r["n_required"] = rl.result.required;
        r["thin"] = rl.result.thin;
        r["dependence_factor"] = rl.result.dependence_factor;
      } else {
        r["note"] = rl.note;
      }
      pj["raftery_lewis"].push_back(r);
    }
    pj["flags"] = p.flags;
    j["parameters"].push_back(pj);
  }
  return j;
}

} // namespace

SummaryDocument summarize(const DrawMatrix& draws, const SurveyData& data, double level) {
  if (draws.empty() || draws.total_draws() == 0) throw ValidationError("cannot summarize an empty draw matrix");
  if (!(level >= 0.0 && level < 1.0)) throw ValidationError("interval level must lie in [0, 1)");
  if (draws.frequencies() != data.unknown_count() || draws.degrees() != data.respondents()) {
    throw ValidationError("draw matrix does not match the survey dimensions");
  }
  SummaryDocument doc;
  doc.level = level;
  doc.total_population = data.total_population();
  doc.metadata = draws.metadata();
  doc.draws = draws.total_draws();
  for (std::size_t u = 0; u < draws.frequencies(); ++u) {
    PopulationSummary p;
    p.label = data.labels().unknown[u];
    p.frequency = interval_of(draws.pooled(draws.theta_index(u)), level);
    p.size = scaled(p.frequency, data.total_population());
    doc.populations.push_back(std::move(p));
  }
  doc.degree_means.resize(draws.degrees());
  for (std::size_t i = 0; i < draws.degrees(); ++i) {
    auto values = draws.pooled(draws.delta_index(i));
    std::sort(values.begin(), values.end());
    doc.degree_means[i] = sorted_mean(values);
  }
  doc.mean_degree = sorted_mean([&] {
    auto v = doc.degree_means;
    std::sort(v.begin(), v.end());
    return v;
  }());
  doc.min_degree_mean = *std::min_element(doc.degree_means.begin(), doc.degree_means.end());
  doc.max_degree_mean = *std::max_element(doc.degree_means.begin(), doc.degree_means.end());
  return doc;
}

std::string summary_to_json(const SummaryDocument& s, const DiagnosticsReport* diagnostics) {
  json j;
  j["meta"] = metadata_json(s.metadata);
  j["level"] = s.level;
  j["total_population"] = s.total_population;
  j["draws"] = s.draws;
  j["populations"] = json::array();
  auto interval = [](const IntervalSummary& x) {
    return json{{"mean", x.mean}, {"median", x.median}, {"lower", x.lower}, {"upper", x.upper}};
  };
  for (const auto& p : s.populations) {
    j["populations"].push_back({{"label", p.label}, {"frequency", interval(p.frequency)}, {"size", interval(p.size)}});
  }
  j["degrees"] = {{"mean", s.mean_degree},
                  {"min_posterior_mean", s.min_degree_mean},
                  {"max_posterior_mean", s.max_degree_mean},
                  {"posterior_means", s.degree_means}};
  if (diagnostics != nullptr) j["diagnostics"] = diagnostics_json(*diagnostics);
  return j.dump(2);
}

std::string diagnostics_to_json(const DiagnosticsReport& report, const DrawMetadata& metadata) {
  json j = diagnostics_json(report);
  j["meta"] = metadata_json(metadata);
  return j.dump(2);
}

} // namespace nsum
