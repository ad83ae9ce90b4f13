#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsum {

/// Dense row-major matrix of nonnegative integer counts.
class CountMatrix {
public:
  CountMatrix() = default;
  CountMatrix(std::size_t rows, std::size_t cols, std::vector<std::int64_t> values);
  CountMatrix(std::size_t rows, std::size_t cols) : CountMatrix(rows, cols, std::vector<std::int64_t>(rows * cols, 0)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::int64_t operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  std::int64_t& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

  std::span<const std::int64_t> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  const std::vector<std::int64_t>& values() const noexcept { return values_; }

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> values_;
};

/// Respondent-by-population counts for one Network Scale-Up survey.
///
/// `known` holds contacts reported in each population of known size and
/// `unknown` those reported in each hidden population. Construction
/// validates every invariant; a known-frequency total of one or more is
/// recorded as a warning rather than rejected.
class SurveyData {
public:
  struct Labels {
    std::vector<std::string> known;
    std::vector<std::string> unknown;
    std::vector<std::string> respondents;
    friend bool operator==(const Labels&, const Labels&) = default;
  };

  SurveyData(CountMatrix known, CountMatrix unknown, std::vector<double> known_sizes,
             double total_population, std::vector<double> weights = {}, Labels labels = {});

  std::size_t respondents() const noexcept { return known_.rows(); }
  std::size_t known_count() const noexcept { return known_.cols(); }
  std::size_t unknown_count() const noexcept { return unknown_.cols(); }

  const CountMatrix& known() const noexcept { return known_; }
  const CountMatrix& unknown() const noexcept { return unknown_; }
  const std::vector<double>& known_sizes() const noexcept { return known_sizes_; }
  double total_population() const noexcept { return total_population_; }
  /// Sampling weights; carried through to outputs, never used in estimation.
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Labels& labels() const noexcept { return labels_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Largest count reported by respondent `i` over every population.
  std::int64_t max_count(std::size_t i) const noexcept;
  /// Largest count reported by respondent `i` over known populations only.
  std::int64_t max_known_count(std::size_t i) const noexcept;
  std::int64_t known_row_sum(std::size_t i) const noexcept;
  std::int64_t unknown_row_sum(std::size_t i) const noexcept;
  std::int64_t unknown_column_sum(std::size_t u) const noexcept;

  friend bool operator==(const SurveyData& a, const SurveyData& b) {
    return a.known_ == b.known_ && a.unknown_ == b.unknown_ && a.known_sizes_ == b.known_sizes_ &&
           a.total_population_ == b.total_population_ && a.weights_ == b.weights_ && a.labels_ == b.labels_;
  }

private:
  CountMatrix known_;
  CountMatrix unknown_;
  std::vector<double> known_sizes_;
  double total_population_;
  std::vector<double> weights_;
  Labels labels_;
  std::vector<std::string> warnings_;
};

/// Beta hyperparameters per hidden population, Gamma per respondent degree.
struct PriorSpec {
  std::vector<double> a, b;
  std::vector<double> c, d;

  /// a = b = 1 (uniform frequencies), c = 2 and d = 0.01 (mean degree 200).
  static PriorSpec defaults(const SurveyData& data, double c = 2.0, double d = 0.01);
  void validate(const SurveyData& data) const;
};

struct BetaParams {
  double alpha;
  double beta;
};

/// Gamma(shape, rate) restricted to (lower, infinity).
struct TruncGammaParams {
  double shape;
  double rate;
  double lower;

  void validate() const;
};

/// Hidden-population frequencies and respondent degrees.
struct LatentState {
  std::vector<double> theta;
  std::vector<double> delta;
};

enum class LikelihoodMode { poisson_approx, continuous_binomial };

/// Known-population frequencies N_k / N.
std::vector<double> pi_frequencies(const SurveyData& data);

/// Beta full conditional of frequency `u` given the degrees.
/// Throws ValidationError naming the respondent if a degree is below its count.
BetaParams theta_full_conditional(const SurveyData& data, std::span<const double> delta, std::size_t u,
                                  const PriorSpec& prior);

/// Truncated-Gamma full conditional of degree `i` under the Poisson approximation.
TruncGammaParams delta_full_conditional(const SurveyData& data, std::span<const double> theta, std::size_t i,
                                        const PriorSpec& prior);

/// Log-likelihood of all counts. Returns -infinity outside the support.
double log_likelihood(const SurveyData& data, const LatentState& state, LikelihoodMode mode);

/// Binomial log-mass with a real-valued number of trials (log-Gamma extension).
double continuous_binomial_log_mass(std::int64_t count, double trials, double p);

/// Poisson log-mass of `count` at mean `trials * p`.
double poisson_log_mass(std::int64_t count, double trials, double p);

/// Per-respondent piece of the continuous-binomial likelihood that does not
/// depend on the frequencies: sum over cells of log Gamma(delta + 1) - log Gamma(delta - y + 1).
///
/// Together with delta * sum(log1p(-p)) it reproduces the respondent's
/// log-likelihood up to an additive constant; random-walk updates of the
/// degree only need this part.
class DegreeCountTerm {
public:
  DegreeCountTerm() = default;
  DegreeCountTerm(const SurveyData& data, std::size_t i);

  double operator()(double delta) const noexcept;
  double lower_bound() const noexcept { return lower_; }

private:
  std::vector<double> nonzero_counts_;
  double lower_ = 0.0;
};

} // namespace nsum
