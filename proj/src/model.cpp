#include "nsum/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nsum/errors.hpp"

namespace nsum {

CountMatrix::CountMatrix(std::size_t rows, std::size_t cols, std::vector<std::int64_t> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ValidationError("count matrix: expected " + std::to_string(rows_ * cols_) + " values, got " +
                          std::to_string(values_.size()));
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if ((*this)(r, c) < 0) {
        throw ValidationError("count matrix: negative count at respondent " + std::to_string(r) +
                              ", population " + std::to_string(c));
      }
    }
  }
}

namespace {

std::vector<std::string> default_labels(const std::string& prefix, std::size_t count) {
  std::vector<std::string> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = prefix + std::to_string(i + 1);
  return labels;
}

} // namespace

SurveyData::SurveyData(CountMatrix known, CountMatrix unknown, std::vector<double> known_sizes,
                       double total_population, std::vector<double> weights, Labels labels)
    : known_(std::move(known)), unknown_(std::move(unknown)), known_sizes_(std::move(known_sizes)),
      total_population_(total_population), weights_(std::move(weights)), labels_(std::move(labels)) {
  const std::size_t n = known_.rows();
  if (n == 0) throw ValidationError("survey has no respondents");
  if (unknown_.rows() != n) {
    throw ValidationError("unknown-population counts have " + std::to_string(unknown_.rows()) +
                          " rows, known-population counts have " + std::to_string(n));
  }
  if (known_.cols() == 0) throw ValidationError("at least one known population is required");
  if (unknown_.cols() == 0) throw ValidationError("at least one unknown population is required");
  if (known_sizes_.size() != known_.cols()) {
    throw ValidationError("expected " + std::to_string(known_.cols()) + " known sizes, got " +
                          std::to_string(known_sizes_.size()));
  }
  if (!(total_population_ > 0.0) || !std::isfinite(total_population_)) {
    throw ValidationError("total population must be a positive finite number");
  }
  double pi_total = 0.0;
  for (std::size_t k = 0; k < known_sizes_.size(); ++k) {
    const double size = known_sizes_[k];
    if (!(size > 0.0) || !(size < total_population_)) {
      throw ValidationError("known population " + std::to_string(k) + " has size " + std::to_string(size) +
                            ", must lie in (0, total population)");
    }
    pi_total += size / total_population_;
  }
  if (pi_total >= 1.0) {
    warnings_.push_back("known-population frequencies sum to " + std::to_string(pi_total) + " (>= 1)");
  }

  if (weights_.empty()) weights_.assign(n, 1.0);
  if (weights_.size() != n) {
    throw ValidationError("expected " + std::to_string(n) + " weights, got " + std::to_string(weights_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw ValidationError("weight of respondent " + std::to_string(i) + " must be positive");
    }
  }

  if (labels_.known.empty()) labels_.known = default_labels("known", known_.cols());
  if (labels_.unknown.empty()) labels_.unknown = default_labels("unknown", unknown_.cols());
  if (labels_.known.size() != known_.cols() || labels_.unknown.size() != unknown_.cols() ||
      (!labels_.respondents.empty() && labels_.respondents.size() != n)) {
    throw ValidationError("label counts do not match the data dimensions");
  }
}

std::int64_t SurveyData::max_count(std::size_t i) const noexcept {
  const auto u = unknown_.row(i);
  return std::max(max_known_count(i), *std::max_element(u.begin(), u.end()));
}

std::int64_t SurveyData::max_known_count(std::size_t i) const noexcept {
  const auto x = known_.row(i);
  return *std::max_element(x.begin(), x.end());
}

std::int64_t SurveyData::known_row_sum(std::size_t i) const noexcept {
  const auto x = known_.row(i);
  return std::accumulate(x.begin(), x.end(), std::int64_t{0});
}

std::int64_t SurveyData::unknown_row_sum(std::size_t i) const noexcept {
  const auto y = unknown_.row(i);
  return std::accumulate(y.begin(), y.end(), std::int64_t{0});
}

std::int64_t SurveyData::unknown_column_sum(std::size_t u) const noexcept {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < unknown_.rows(); ++i) total += unknown_(i, u);
  return total;
}

PriorSpec PriorSpec::defaults(const SurveyData& data, double c, double d) {
  const std::size_t U = data.unknown_count();
  const std::size_t n = data.respondents();
  return PriorSpec{std::vector<double>(U, 1.0), std::vector<double>(U, 1.0), std::vector<double>(n, c),
                   std::vector<double>(n, d)};
}

void PriorSpec::validate(const SurveyData& data) const {
  if (a.size() != data.unknown_count() || b.size() != data.unknown_count()) {
    throw ValidationError("frequency prior needs one (a, b) pair per unknown population");
  }
  if (c.size() != data.respondents() || d.size() != data.respondents()) {
    throw ValidationError("degree prior needs one (c, d) pair per respondent");
  }
  auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
  };
  if (!positive(a) || !positive(b) || !positive(c) || !positive(d)) {
    throw ValidationError("prior hyperparameters must be strictly positive");
  }
}

void TruncGammaParams::validate() const {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw ValidationError("truncated gamma: shape must be positive");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("truncated gamma: rate must be positive");
  if (!(lower >= 0.0) || !std::isfinite(lower)) {
    throw ValidationError("truncated gamma: lower bound must be nonnegative");
  }
}

std::vector<double> pi_frequencies(const SurveyData& data) {
  std::vector<double> pi(data.known_count());
  for (std::size_t k = 0; k < pi.size(); ++k) pi[k] = data.known_sizes()[k] / data.total_population();
  return pi;
}

BetaParams theta_full_conditional(const SurveyData& data, std::span<const double> delta, std::size_t u,
                                  const PriorSpec& prior) {
  if (delta.size() != data.respondents()) throw ValidationError("degree vector has the wrong length");
  double count_total = 0.0;
  double remainder = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const auto y = static_cast<double>(data.unknown()(i, u));
    if (delta[i] < y) {
      throw ValidationError("degree of respondent " + std::to_string(i) + " (" + std::to_string(delta[i]) +
                            ") is below its count " + std::to_string(data.unknown()(i, u)) +
                            " for unknown population " + std::to_string(u));
    }
    count_total += y;
    remainder += delta[i] - y;
  }
  return {count_total + prior.a[u], remainder + prior.b[u]};
}

TruncGammaParams delta_full_conditional(const SurveyData& data, std::span<const double> theta, std::size_t i,
                                        const PriorSpec& prior) {
  const auto pi = pi_frequencies(data);
  const double shape =
      static_cast<double>(data.unknown_row_sum(i) + data.known_row_sum(i)) + prior.c[i];
  const double rate = std::accumulate(theta.begin(), theta.end(), 0.0) +
                      std::accumulate(pi.begin(), pi.end(), 0.0) + prior.d[i];
  return {shape, rate, static_cast<double>(data.max_count(i))};
}

double continuous_binomial_log_mass(std::int64_t count, double trials, double p) {
  const auto y = static_cast<double>(count);
  if (count < 0 || trials < y) return -std::numeric_limits<double>::infinity();
  double value = (trials - y) * std::log1p(-p);
  if (count > 0) {
    value += std::lgamma(trials + 1.0) - std::lgamma(y + 1.0) - std::lgamma(trials - y + 1.0) + y * std::log(p);
  }
  return value;
}

double poisson_log_mass(std::int64_t count, double trials, double p) {
  const auto y = static_cast<double>(count);
  if (count < 0 || !(trials > 0.0)) return -std::numeric_limits<double>::infinity();
  const double mean = trials * p;
  double value = -mean - std::lgamma(y + 1.0);
  if (count > 0) value += y * std::log(mean);
  return value;
}

double log_likelihood(const SurveyData& data, const LatentState& state, LikelihoodMode mode) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (state.theta.size() != data.unknown_count() || state.delta.size() != data.respondents()) {
    throw ValidationError("latent state dimensions do not match the survey");
  }
  const auto pi = pi_frequencies(data);
  auto cell = [mode](std::int64_t y, double delta, double p) {
    return mode == LikelihoodMode::continuous_binomial ? continuous_binomial_log_mass(y, delta, p)
                                                       : poisson_log_mass(y, delta, p);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < data.respondents(); ++i) {
    const double delta = state.delta[i];
    if (!(delta > 0.0)) return neg_inf;
    for (std::size_t u = 0; u < data.unknown_count(); ++u) total += cell(data.unknown()(i, u), delta, state.theta[u]);
    for (std::size_t k = 0; k < data.known_count(); ++k) total += cell(data.known()(i, k), delta, pi[k]);
    if (total == neg_inf) return neg_inf;
  }
  return total;
}

DegreeCountTerm::DegreeCountTerm(const SurveyData& data, std::size_t i)
    : lower_(static_cast<double>(data.max_count(i))) {
  for (auto y : data.unknown().row(i)) {
    if (y > 0) nonzero_counts_.push_back(static_cast<double>(y));
  }
  for (auto x : data.known().row(i)) {
    if (x > 0) nonzero_counts_.push_back(static_cast<double>(x));
  }
}

double DegreeCountTerm::operator()(double delta) const noexcept {
  if (delta < lower_) return -std::numeric_limits<double>::infinity();
  if (nonzero_counts_.empty()) return 0.0;
  double value = static_cast<double>(nonzero_counts_.size()) * std::lgamma(delta + 1.0);
  for (double y : nonzero_counts_) value -= std::lgamma(delta - y + 1.0);
  return value;
}

} // namespace nsum
