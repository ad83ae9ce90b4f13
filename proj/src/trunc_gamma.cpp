#include "nsum/trunc_gamma.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace nsum {

namespace detail {

namespace {

// P(a, x) below e^-75 cannot change P + U (1 - P) or (1 - U)(1 - P) in double
// precision for any uniform the stream can produce (U >= 2^-54).
constexpr double kNegligibleLogMass = -75.0;

double log_lower_mass_bound(double shape, double x) {
  // P(a, x) <= x^a e^-x / Gamma(a + 1) / (1 - x / (a + 1)) for x < a + 1.
  return shape * std::log(x) - x - std::lgamma(shape + 1.0) - std::log1p(-x / (shape + 1.0));
}

} // namespace

TruncationMass truncation_mass(double shape, double scaled_lower) {
  if (scaled_lower <= 0.0) return {0.0, 1.0};
  if (scaled_lower < shape + 1.0 && log_lower_mass_bound(shape, scaled_lower) < kNegligibleLogMass) {
    return {0.0, 1.0};
  }
  if (scaled_lower < shape) {
    const double p = boost::math::gamma_p(shape, scaled_lower);
    return {p, 1.0 - p};
  }
  const double q = boost::math::gamma_q(shape, scaled_lower);
  return {1.0 - q, q};
}

double invert_truncated(double shape, double rate, double lower, TruncationMass mass, RandomStream& rng) {
  const double u = rng.uniform();
  const double p = mass.lower + u * mass.upper;
  const double q = (1.0 - u) * mass.upper;
  const double x = p <= 0.5 ? boost::math::gamma_p_inv(shape, p) : boost::math::gamma_q_inv(shape, q);
  const double value = x / rate;
  return value > lower ? value : std::nextafter(lower, std::numeric_limits<double>::infinity());
}

double sample_gamma_tail(double shape, double rate, double lower, RandomStream& rng) {
  // Proposal lower + Exp(lambda). With lambda = rate - (shape - 1) / lower the
  // log acceptance ratio (shape - 1) log(x / lower) - (rate - lambda)(x - lower)
  // peaks at x = lower, so it is bounded by zero. For shape < 1 use lambda = rate.
  const double excess_shape = shape - 1.0;
  double lambda = rate;
  if (excess_shape > 0.0) lambda = rate - excess_shape / lower;
  if (!(lambda > 0.0)) lambda = 0.5 * rate;
  const double slack = rate - lambda;
  auto log_ratio = [&](double x) { return excess_shape * std::log(x / lower) - slack * (x - lower); };
  double log_bound = 0.0;
  if (excess_shape > 0.0 && slack > 0.0) {
    const double peak = excess_shape / slack;
    if (peak > lower) log_bound = log_ratio(peak);
  }
  for (;;) {
    const double x = lower + rng.exponential() / lambda;
    if (std::log(rng.uniform()) <= log_ratio(x) - log_bound) {
      return x > lower ? x : std::nextafter(lower, std::numeric_limits<double>::infinity());
    }
  }
}

} // namespace detail

double sample_trunc_gamma(const TruncGammaParams& params, RandomStream& rng) {
  params.validate();
  const auto mass = detail::truncation_mass(params.shape, params.rate * params.lower);
  if (mass.upper < kTailInversionFloor) {
    return detail::sample_gamma_tail(params.shape, params.rate, params.lower, rng);
  }
  return detail::invert_truncated(params.shape, params.rate, params.lower, mass, rng);
}

TruncGammaSampler::TruncGammaSampler(const TruncGammaParams& params) : params_(params) {
  params_.validate();
  const auto mass = detail::truncation_mass(params_.shape, params_.rate * params_.lower);
  lower_mass_ = mass.lower;
  upper_mass_ = mass.upper;
  if (upper_mass_ >= 0.5) {
    method_ = Method::parent_rejection;
  } else if (upper_mass_ < kTailInversionFloor) {
    method_ = Method::tail_rejection;
  } else {
    method_ = Method::inversion;
  }
}

double TruncGammaSampler::operator()(RandomStream& rng) const {
  switch (method_) {
  case Method::parent_rejection:
    for (;;) {
      const double x = rng.gamma(params_.shape) / params_.rate;
      if (x > params_.lower) return x;
    }
  case Method::tail_rejection:
    return detail::sample_gamma_tail(params_.shape, params_.rate, params_.lower, rng);
  case Method::inversion:
    break;
  }
  return detail::invert_truncated(params_.shape, params_.rate, params_.lower, {lower_mass_, upper_mass_}, rng);
}

} // namespace nsum
