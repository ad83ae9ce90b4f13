#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace nsum {

/// Philox4x32-10 counter-based block function.
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
/// Independent streams are obtained by fixing disjoint counter prefixes,
/// so no state is shared between streams.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Stream selectors reserved by the samplers.
namespace stream_id {
inline constexpr std::uint32_t theta = 0;
inline constexpr std::uint32_t synthetic = 0xFFFF0000u;
/// Degree updates use one stream per block of this many respondents.
inline constexpr std::size_t respondent_block = 64;
inline constexpr std::uint32_t degree_block(std::size_t respondent) {
  return 1u + static_cast<std::uint32_t>(respondent / respondent_block);
}
} // namespace stream_id

/// One reproducible random stream, addressed by (seed, chain, substream).
///
/// Satisfies UniformRandomBitGenerator so it also plugs into <random>.
class RandomStream {
public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint32_t chain, std::uint32_t substream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() noexcept;

  /// Standard normal variate (Marsaglia polar method).
  double normal() noexcept;

  /// Exponential variate with unit rate.
  double exponential() noexcept;

  /// Gamma(shape, 1) variate (Marsaglia-Tsang squeeze).
  double gamma(double shape) noexcept;

  /// Beta(alpha, beta) variate via the gamma ratio.
  double beta(double alpha, double beta) noexcept;

  /// Binomial(trials, p) variate; exact for every trials / p.
  std::uint64_t binomial(std::uint64_t trials, double p) noexcept;

private:
  void refill() noexcept;

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  unsigned used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

} // namespace nsum
