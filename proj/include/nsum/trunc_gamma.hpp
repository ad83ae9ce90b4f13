#pragma once

#include "nsum/model.hpp"
#include "nsum/random.hpp"

namespace nsum {

/// Survival mass below which inversion is replaced by tail rejection.
inline constexpr double kTailInversionFloor = 1e-12;

/// One draw from Gamma(shape, rate) restricted to (lower, infinity).
///
/// Inverse-CDF method: with P the regularized lower incomplete gamma,
/// returns P^-1(P(shape, rate*lower) + U (1 - P(shape, rate*lower))) / rate.
/// The inversion runs on whichever tail keeps full precision. If the
/// retained mass falls below kTailInversionFloor, draws come from a
/// shifted-exponential rejection sampler instead. Throws ValidationError
/// for invalid parameters.
double sample_trunc_gamma(const TruncGammaParams& params, RandomStream& rng);

/// Repeated draws from one fixed truncated Gamma.
///
/// The truncation mass is evaluated once at construction. When at least
/// half of the parent Gamma lies above the bound, draws use rejection from
/// the parent (expected at most two Gamma variates per draw). Otherwise
/// they use the same inversion or tail rejection as sample_trunc_gamma.
/// Every branch is exact.
class TruncGammaSampler {
public:
  explicit TruncGammaSampler(const TruncGammaParams& params);

  double operator()(RandomStream& rng) const;

  const TruncGammaParams& params() const noexcept { return params_; }
  /// Mass of the untruncated Gamma above `lower`.
  double retained_mass() const noexcept { return upper_mass_; }

private:
  enum class Method { parent_rejection, inversion, tail_rejection };

  TruncGammaParams params_;
  double lower_mass_;
  double upper_mass_;
  Method method_;
};

namespace detail {

struct TruncationMass {
  double lower;  // P(shape, rate * lower)
  double upper;  // 1 - P(shape, rate * lower)
};

TruncationMass truncation_mass(double shape, double scaled_lower);

double invert_truncated(double shape, double rate, double lower, TruncationMass mass, RandomStream& rng);

double sample_gamma_tail(double shape, double rate, double lower, RandomStream& rng);

} // namespace detail

} // namespace nsum
