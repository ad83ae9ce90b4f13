#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nsum/model.hpp"

namespace nsum {

struct SyntheticSpec {
  std::size_t respondents = 500;
  std::vector<double> theta;        // true hidden-population frequencies, in [0, 1)
  std::vector<double> known_sizes;  // N_k
  double total_population = 1e6;    // N
  double degree_shape = 2.0;        // c
  double degree_rate = 0.01;        // d
  std::uint64_t seed = 1;
};

struct GroundTruth {
  std::vector<double> theta;
  std::vector<double> delta;                 // continuous degrees, Gamma(c, d)
  std::vector<std::int64_t> rounded_degree;  // Binomial trial counts actually used
};

struct SyntheticSurvey {
  SurveyData data;
  GroundTruth truth;
};

/// Forward simulation of the random-degree model.
///
/// Each degree is drawn from Gamma(c, d) and rounded to the nearest integer
/// to serve as the Binomial trial count; counts are Binomial(round(delta_i),
/// theta_u) and Binomial(round(delta_i), N_k / N).
SyntheticSurvey generate_synthetic(const SyntheticSpec& spec);

/// Evenly spread frequencies: theta in [0.002, 0.01], known frequencies in
/// [0.001, 0.01] of N = 10^6. Keeps every rate in the small-frequency regime.
SyntheticSpec default_synthetic_spec(std::size_t respondents, std::size_t known, std::size_t unknown,
                                     std::uint64_t seed);

} // namespace nsum
