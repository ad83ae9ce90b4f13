#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsum/draws.hpp"

namespace nsum {

/// Potential scale reduction factor over >= 2 equal-length chains.
///
/// Between/within variance decomposition with the Brooks-Gelman degrees-of-
/// freedom correction. Sampling noise can push the raw statistic slightly
/// below one; the returned value is floored at one (see gelman_rubin_raw).
/// Throws InsufficientDrawsError for < 2 chains or chains shorter than 10,
/// ValidationError for unequal lengths, DegenerateChainError for zero
/// within-chain variance.
double gelman_rubin(std::span<const std::vector<double>> chains);
double gelman_rubin_raw(std::span<const std::vector<double>> chains);

/// Spectral density at frequency zero from an AR(p) fit (Yule-Walker, AIC order).
double spectral_density_at_zero(std::span<const double> series);

/// Geweke z-score comparing the means of the first and last windows.
double geweke(std::span<const double> chain, double first_frac = 0.1, double last_frac = 0.5);

struct RafteryLewisOptions {
  double quantile = 0.025;
  double accuracy = 0.005;
  double probability = 0.95;
  double convergence_eps = 0.001;
};

struct RafteryLewisResult {
  std::size_t min_draws;     // N_min, independent-sampling requirement
  std::size_t burn_in;
  std::size_t required;      // burn-in plus kept draws
  std::size_t thin;
  double dependence_factor;  // required / min_draws
};

/// ceil((z_{(1+s)/2} / r)^2 q (1 - q)); depends only on the options.
std::size_t raftery_lewis_min_draws(const RafteryLewisOptions& options = {});

/// Two-state Markov chain analysis of the quantile-indicator sequence.
/// Throws InsufficientDrawsError (carrying N_min) when the chain is shorter than N_min.
RafteryLewisResult raftery_lewis(std::span<const double> chain, const RafteryLewisOptions& options = {});

/// Sample autocorrelation at `lag` (biased autocovariance estimator).
double autocorrelation(std::span<const double> chain, std::size_t lag);

/// ESS by Geyer's initial positive sequence; never exceeds the chain length.
double effective_sample_size(std::span<const double> chain);
/// Sum of per-chain effective sizes.
double effective_sample_size(std::span<const std::vector<double>> chains);

/// Sample standard deviation of the pooled draws over sqrt(ESS).
double monte_carlo_standard_error(std::span<const std::vector<double>> chains);

enum class DiagnosticStatus { ok, degenerate, unavailable, insufficient_draws };

std::string_view status_name(DiagnosticStatus status) noexcept;

/// A diagnostic value or the typed reason it could not be computed.
struct Outcome {
  DiagnosticStatus status = DiagnosticStatus::unavailable;
  double value = 0.0;
  std::string note;

  bool ok() const noexcept { return status == DiagnosticStatus::ok; }
};

struct RafteryLewisOutcome {
  DiagnosticStatus status = DiagnosticStatus::unavailable;
  RafteryLewisResult result{};
  std::string note;
};

struct DiagnosticsThresholds {
  double rhat_max = 1.1;
  /// Family-wise level for the Geweke z-scores (Bonferroni over all tests in a report).
  double geweke_alpha = 0.01;
  double dependence_factor_max = 5.0;
  double first_frac = 0.1;
  double last_frac = 0.5;
  std::vector<std::size_t> lags{1, 5, 10, 50};
  RafteryLewisOptions raftery_lewis{};
};

struct ParameterDiagnostics {
  std::string name;
  Outcome rhat;
  Outcome rhat_raw;
  std::vector<Outcome> geweke;  // per chain
  Outcome ess;
  std::vector<Outcome> autocorrelations;  // per lag, averaged over chains
  std::vector<RafteryLewisOutcome> raftery_lewis;  // per chain
  std::vector<std::string> flags;
};

struct DiagnosticsReport {
  std::size_t chains = 0;
  std::size_t draws_per_chain = 0;
  DiagnosticsThresholds thresholds;
  double geweke_critical = 0.0;
  std::vector<ParameterDiagnostics> parameters;
  /// Largest Raftery-Lewis requirement over parameters and chains, if any was computable.
  std::optional<std::size_t> max_required;
  std::optional<std::string> max_required_parameter;

  bool flagged() const noexcept;
  std::vector<std::string> flagged_parameters() const;
};

/// Runs every diagnostic on every parameter (or on `parameters` only, if given).
DiagnosticsReport diagnose(const DrawMatrix& draws, const DiagnosticsThresholds& thresholds = {},
                           std::span<const std::size_t> parameters = {});

} // namespace nsum
