#include "nsum/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "nsum/errors.hpp"

namespace nsum {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double covariance_of(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

// Biased autocovariances 0..max_lag of a demeaned copy.
std::vector<double> autocovariances(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const double m = mean_of(x);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - m;
  std::vector<double> acov(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += centered[i] * centered[i + k];
    acov[k] = s / static_cast<double>(n);
  }
  return acov;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

} // namespace

double gelman_rubin_raw(std::span<const std::vector<double>> chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw InsufficientDrawsError(2, m, "Gelman-Rubin needs at least two chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw ValidationError("Gelman-Rubin chains must have equal length");
  }
  if (n < 10) throw InsufficientDrawsError(10, n, "Gelman-Rubin");

  std::vector<double> means(m), variances(m), squared_means(m);
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(chains[j]);
    variances[j] = variance_of(chains[j]);
    squared_means[j] = means[j] * means[j];
  }
  const double W = mean_of(variances);
  if (!(W > 0.0)) throw DegenerateChainError("Gelman-Rubin: zero within-chain variance");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double B = nd * variance_of(means);
  const double grand_mean = mean_of(means);

  const double V = (nd - 1.0) / nd * W + (1.0 + 1.0 / md) * B / nd;
  const double var_W = variance_of(variances) / md;
  const double var_B = 2.0 * B * B / (md - 1.0);
  const double cov_WB = nd / md *
                        (covariance_of(variances, squared_means) - 2.0 * grand_mean * covariance_of(variances, means));
  const double var_V = std::pow((nd - 1.0) / nd, 2) * var_W + std::pow((md + 1.0) / (md * nd), 2) * var_B +
                       2.0 * (md + 1.0) * (nd - 1.0) / (md * nd * nd) * cov_WB;
  const double df_factor = var_V > 0.0 ? [&] {
    const double df = 2.0 * V * V / var_V;
    return (df + 3.0) / (df + 1.0);
  }() : 1.0;
  return std::sqrt(df_factor * V / W);
}

double gelman_rubin(std::span<const std::vector<double>> chains) {
  return std::max(1.0, gelman_rubin_raw(chains));
}

double spectral_density_at_zero(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw InsufficientDrawsError(2, n, "spectral density");
  const std::size_t max_order =
      std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::floor(10.0 * std::log10(static_cast<double>(n)))));
  const auto acov = autocovariances(series, max_order);
  if (!(acov[0] > 0.0)) throw DegenerateChainError("spectral density: zero variance");

  // Levinson-Durbin recursion, keeping the order with the smallest AIC.
  std::vector<double> phi, best_phi;
  double innovation = acov[0];
  double best_innovation = innovation;
  double best_aic = static_cast<double>(n) * std::log(innovation);
  for (std::size_t p = 1; p <= max_order; ++p) {
    double num = acov[p];
    for (std::size_t j = 0; j < phi.size(); ++j) num -= phi[j] * acov[p - 1 - j];
    const double reflection = num / innovation;
    std::vector<double> next(p);
    for (std::size_t j = 0; j + 1 < p; ++j) next[j] = phi[j] - reflection * phi[p - 2 - j];
    next[p - 1] = reflection;
    phi = std::move(next);
    innovation *= 1.0 - reflection * reflection;
    if (!(innovation > 0.0)) break;
    const double aic = static_cast<double>(n) * std::log(innovation) + 2.0 * static_cast<double>(p);
    if (aic < best_aic) {
      best_aic = aic;
      best_phi = phi;
      best_innovation = innovation;
    }
  }
  const double order = static_cast<double>(best_phi.size());
  const double prediction_variance = best_innovation * static_cast<double>(n) / (static_cast<double>(n) - (order + 1.0));
  const double phi_total = std::accumulate(best_phi.begin(), best_phi.end(), 0.0);
  return prediction_variance / ((1.0 - phi_total) * (1.0 - phi_total));
}

double geweke(std::span<const double> chain, double first_frac, double last_frac) {
  const std::size_t n = chain.size();
  if (n < 100) throw InsufficientDrawsError(100, n, "Geweke");
  if (!(first_frac > 0.0) || !(last_frac > 0.0) || first_frac + last_frac > 1.0) {
    throw ValidationError("Geweke window fractions must be positive and sum to at most 1");
  }
  const auto first_len = static_cast<std::size_t>(std::floor(first_frac * static_cast<double>(n)));
  const auto last_len = static_cast<std::size_t>(std::floor(last_frac * static_cast<double>(n)));
  const auto head = chain.first(first_len);
  const auto tail = chain.last(last_len);
  const double var_head = spectral_density_at_zero(head) / static_cast<double>(first_len);
  const double var_tail = spectral_density_at_zero(tail) / static_cast<double>(last_len);
  const double se = std::sqrt(var_head + var_tail);
  if (!(se > 0.0)) throw DegenerateChainError("Geweke: zero variance");
  return (mean_of(head) - mean_of(tail)) / se;
}

std::size_t raftery_lewis_min_draws(const RafteryLewisOptions& o) {
  if (!(o.quantile > 0.0 && o.quantile < 1.0) || !(o.accuracy > 0.0) ||
      !(o.probability > 0.0 && o.probability < 1.0)) {
    throw ValidationError("Raftery-Lewis options out of range");
  }
  const double z = normal_quantile(0.5 * (1.0 + o.probability));
  return static_cast<std::size_t>(std::ceil(o.quantile * (1.0 - o.quantile) * z * z / (o.accuracy * o.accuracy)));
}

RafteryLewisResult raftery_lewis(std::span<const double> chain, const RafteryLewisOptions& o) {
  const std::size_t n_min = raftery_lewis_min_draws(o);
  const std::size_t n = chain.size();
  if (n < n_min) throw InsufficientDrawsError(n_min, n, "Raftery-Lewis");
  const double z = normal_quantile(0.5 * (1.0 + o.probability));

  // Type-7 empirical quantile; the indicator only depends on ranks.
  std::vector<double> sorted(chain.begin(), chain.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(n) - 1.0) * o.quantile;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double cut = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[std::min(lo + 1, n - 1)] - sorted[lo]);
  std::vector<int> indicator(n);
  for (std::size_t i = 0; i < n; ++i) indicator[i] = chain[i] <= cut ? 1 : 0;

  // Smallest thinning at which a first-order chain is preferred to second order (BIC).
  std::size_t thin = 0;
  std::vector<int> thinned;
  for (;;) {
    ++thin;
    thinned.clear();
    for (std::size_t i = 0; i < n; i += thin) thinned.push_back(indicator[i]);
    const std::size_t len = thinned.size();
    if (len < 3) throw InsufficientDrawsError(3 * thin, n, "Raftery-Lewis thinning");
    double counts[2][2][2] = {};
    for (std::size_t i = 0; i + 2 < len; ++i) counts[thinned[i]][thinned[i + 1]][thinned[i + 2]] += 1.0;
    double g2 = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int c = 0; c < 2; ++c) {
          if (counts[a][b][c] == 0.0) continue;
          const double row = counts[a][b][0] + counts[a][b][1];
          const double col = counts[0][b][c] + counts[1][b][c];
          const double mid = counts[0][b][0] + counts[0][b][1] + counts[1][b][0] + counts[1][b][1];
          const double fitted = row * col / mid;
          g2 += 2.0 * counts[a][b][c] * std::log(counts[a][b][c] / fitted);
        }
      }
    }
    if (g2 - 2.0 * std::log(static_cast<double>(len - 2)) < 0.0) break;
  }

  double transitions[2][2] = {};
  for (std::size_t i = 0; i + 1 < thinned.size(); ++i) transitions[thinned[i]][thinned[i + 1]] += 1.0;
  // R's table() puts FALSE (above the cut) first: alpha = P(0 -> 1), beta = P(1 -> 0).
  const double alpha = transitions[0][1] / (transitions[0][0] + transitions[0][1]);
  const double beta = transitions[1][0] / (transitions[1][0] + transitions[1][1]);
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DegenerateChainError("Raftery-Lewis: quantile indicator never changes state");
  }
  double burn_raw = 0.0;
  const double mixing = std::abs(1.0 - alpha - beta);
  if (mixing > 0.0) {
    burn_raw = std::log(o.convergence_eps * (alpha + beta) / std::max(alpha, beta)) / std::log(mixing);
  }
  const auto burn_in = static_cast<std::size_t>(std::max(0.0, std::ceil(burn_raw))) * thin;
  const double precision =
      (2.0 - alpha - beta) * alpha * beta * z * z / (std::pow(alpha + beta, 3) * o.accuracy * o.accuracy);
  const auto keep = static_cast<std::size_t>(std::ceil(precision)) * thin;
  const std::size_t required = burn_in + keep;
  return {n_min, burn_in, required, thin, static_cast<double>(required) / static_cast<double>(n_min)};
}

double autocorrelation(std::span<const double> chain, std::size_t lag) {
  if (lag >= chain.size()) throw InsufficientDrawsError(lag + 1, chain.size(), "autocorrelation");
  const auto acov = autocovariances(chain, 0);
  if (!(acov[0] > 0.0)) throw DegenerateChainError("autocorrelation: zero variance");
  const double m = mean_of(chain);
  double s = 0.0;
  for (std::size_t i = 0; i + lag < chain.size(); ++i) s += (chain[i] - m) * (chain[i + lag] - m);
  return s / static_cast<double>(chain.size()) / acov[0];
}

double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 10) throw InsufficientDrawsError(10, n, "effective sample size");
  const double m = mean_of(chain);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = chain[i] - m;
  auto acov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += centered[i] * centered[i + k];
    return s / static_cast<double>(n);
  };
  const double gamma0 = acov(0);
  if (!(gamma0 > 0.0)) throw DegenerateChainError("effective sample size: zero variance");

  // Initial positive sequence: sum pairs rho(2k) + rho(2k+1) while positive.
  double pair_total = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (acov(2 * k) + acov(2 * k + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    pair_total += pair;
  }
  const double tau = -1.0 + 2.0 * pair_total;
  const double nd = static_cast<double>(n);
  if (!(tau > 0.0)) return nd;
  return std::min(nd, nd / tau);
}

double effective_sample_size(std::span<const std::vector<double>> chains) {
  double total = 0.0;
  for (const auto& c : chains) total += effective_sample_size(std::span<const double>(c));
  return total;
}

double monte_carlo_standard_error(std::span<const std::vector<double>> chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  if (pooled.size() < 2) throw InsufficientDrawsError(2, pooled.size(), "Monte Carlo standard error");
  return std::sqrt(variance_of(pooled) / effective_sample_size(chains));
}

std::string_view status_name(DiagnosticStatus status) noexcept {
  switch (status) {
  case DiagnosticStatus::ok: return "ok";
  case DiagnosticStatus::degenerate: return "degenerate";
  case DiagnosticStatus::unavailable: return "unavailable";
  case DiagnosticStatus::insufficient_draws: return "insufficient_draws";
  }
  return "unknown";
}

bool DiagnosticsReport::flagged() const noexcept {
  return std::any_of(parameters.begin(), parameters.end(), [](const auto& p) { return !p.flags.empty(); });
}

std::vector<std::string> DiagnosticsReport::flagged_parameters() const {
  std::vector<std::string> names;
  for (const auto& p : parameters) {
    if (!p.flags.empty()) names.push_back(p.name);
  }
  return names;
}

namespace {

template <typename F>
Outcome attempt(F&& compute) {
  try {
    return {DiagnosticStatus::ok, compute(), {}};
  } catch (const DegenerateChainError& e) {
    return {DiagnosticStatus::degenerate, 0.0, e.what()};
  } catch (const InsufficientDrawsError& e) {
    return {DiagnosticStatus::insufficient_draws, 0.0, e.what()};
  }
}

} // namespace

DiagnosticsReport diagnose(const DrawMatrix& draws, const DiagnosticsThresholds& thresholds,
                           std::span<const std::size_t> parameters) {
  DiagnosticsReport report;
  report.chains = draws.chains();
  report.draws_per_chain = draws.iterations();
  report.thresholds = thresholds;

  std::vector<std::size_t> selected(parameters.begin(), parameters.end());
  if (selected.empty()) {
    selected.resize(draws.parameters());
    std::iota(selected.begin(), selected.end(), std::size_t{0});
  }

  for (std::size_t p : selected) {
    ParameterDiagnostics d;
    d.name = draws.parameter_name(p);
    const auto traces = draws.traces(p);
    if (traces.size() < 2) {
      d.rhat = {DiagnosticStatus::unavailable, 0.0, "single chain"};
      d.rhat_raw = d.rhat;
    } else {
      d.rhat_raw = attempt([&] { return gelman_rubin_raw(traces); });
      d.rhat = d.rhat_raw;
      if (d.rhat.ok()) d.rhat.value = std::max(1.0, d.rhat.value);
    }
    for (const auto& trace : traces) {
      d.geweke.push_back(attempt([&] { return geweke(trace, thresholds.first_frac, thresholds.last_frac); }));
      RafteryLewisOutcome rl;
      try {
        rl.result = raftery_lewis(trace, thresholds.raftery_lewis);
        rl.status = DiagnosticStatus::ok;
      } catch (const InsufficientDrawsError& e) {
        rl.status = DiagnosticStatus::insufficient_draws;
        rl.result.min_draws = e.needed();
        rl.note = e.what();
      } catch (const DegenerateChainError& e) {
        rl.status = DiagnosticStatus::degenerate;
        rl.note = e.what();
      }
      d.raftery_lewis.push_back(rl);
    }
    d.ess = attempt([&] { return effective_sample_size(traces); });
    for (std::size_t lag : thresholds.lags) {
      d.autocorrelations.push_back(attempt([&] {
        double total = 0.0;
        for (const auto& trace : traces) total += autocorrelation(trace, lag);
        return total / static_cast<double>(traces.size());
      }));
    }
    report.parameters.push_back(std::move(d));
  }

  std::size_t geweke_tests = 0;
  for (const auto& d : report.parameters) {
    geweke_tests += static_cast<std::size_t>(std::count_if(d.geweke.begin(), d.geweke.end(), [](const Outcome& o) { return o.ok(); }));
  }
  report.geweke_critical =
      geweke_tests > 0 ? normal_quantile(1.0 - thresholds.geweke_alpha / (2.0 * static_cast<double>(geweke_tests))) : 0.0;

  for (auto& d : report.parameters) {
    if (d.rhat.ok() && d.rhat.value > thresholds.rhat_max) d.flags.push_back("rhat");
    if (std::any_of(d.geweke.begin(), d.geweke.end(),
                    [&](const Outcome& o) { return o.ok() && std::abs(o.value) > report.geweke_critical; })) {
      d.flags.push_back("geweke");
    }
    for (const auto& rl : d.raftery_lewis) {
      if (rl.status != DiagnosticStatus::ok) continue;
      if (!report.max_required || rl.result.required > *report.max_required) {
        report.max_required = rl.result.required;
        report.max_required_parameter = d.name;
      }
    }
    if (std::any_of(d.raftery_lewis.begin(), d.raftery_lewis.end(), [&](const RafteryLewisOutcome& rl) {
          return rl.status == DiagnosticStatus::ok && rl.result.dependence_factor > thresholds.dependence_factor_max;
        })) {
      d.flags.push_back("raftery_lewis");
    }
  }
  return report;
}

} // namespace nsum
