#include "nsum/synthetic.hpp"

#include <cmath>

#include "nsum/errors.hpp"
#include "nsum/random.hpp"

namespace nsum {

SyntheticSurvey generate_synthetic(const SyntheticSpec& spec) {
  const std::size_t n = spec.respondents;
  const std::size_t K = spec.known_sizes.size();
  const std::size_t U = spec.theta.size();
  if (n == 0 || K == 0 || U == 0) throw ValidationError("synthetic survey needs n, K, U >= 1");
  for (double t : spec.theta) {
    if (!(t >= 0.0 && t < 1.0)) throw ValidationError("true frequencies must lie in [0, 1)");
  }
  if (!(spec.degree_shape > 0.0) || !(spec.degree_rate > 0.0)) {
    throw ValidationError("degree law parameters must be positive");
  }
  if (!(spec.total_population > 0.0)) throw ValidationError("total population must be positive");
  std::vector<double> pi(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double size = spec.known_sizes[k];
    if (!(size > 0.0 && size < spec.total_population)) {
      throw ValidationError("known sizes must lie in (0, total population)");
    }
    pi[k] = size / spec.total_population;
  }

  RandomStream rng(spec.seed, 0, stream_id::synthetic);
  GroundTruth truth;
  truth.theta = spec.theta;
  truth.delta.resize(n);
  truth.rounded_degree.resize(n);
  CountMatrix known(n, K);
  CountMatrix unknown(n, U);
  for (std::size_t i = 0; i < n; ++i) {
    const double delta = rng.gamma(spec.degree_shape) / spec.degree_rate;
    const auto trials = static_cast<std::int64_t>(std::llround(delta));
    truth.delta[i] = delta;
    truth.rounded_degree[i] = trials;
    for (std::size_t k = 0; k < K; ++k) {
      known(i, k) = static_cast<std::int64_t>(rng.binomial(static_cast<std::uint64_t>(trials), pi[k]));
    }
    for (std::size_t u = 0; u < U; ++u) {
      unknown(i, u) = static_cast<std::int64_t>(rng.binomial(static_cast<std::uint64_t>(trials), spec.theta[u]));
    }
  }
  SurveyData data(std::move(known), std::move(unknown), spec.known_sizes, spec.total_population);
  return {std::move(data), std::move(truth)};
}

SyntheticSpec default_synthetic_spec(std::size_t respondents, std::size_t known, std::size_t unknown,
                                     std::uint64_t seed) {
  SyntheticSpec spec;
  spec.respondents = respondents;
  spec.seed = seed;
  spec.total_population = 1e6;
  auto spread = [](std::size_t count, double lo, double hi, std::size_t j) {
    return count == 1 ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
  };
  for (std::size_t u = 0; u < unknown; ++u) spec.theta.push_back(spread(unknown, 0.002, 0.01, u));
  for (std::size_t k = 0; k < known; ++k) {
    spec.known_sizes.push_back(spread(known, 0.001, 0.01, k) * spec.total_population);
  }
  return spec;
}

} // namespace nsum
