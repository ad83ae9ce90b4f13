#include "nsum/random.hpp"

#include <algorithm>
#include <cmath>

namespace nsum {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline PhiloxCounter philox_round(const PhiloxCounter& c, const PhiloxKey& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    counter = philox_round(counter, key);
  }
  return counter;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint32_t chain, std::uint32_t substream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, 0u, substream, chain} {}

void RandomStream::refill() noexcept {
  block_ = philox4x32_10(counter_, key_);
  // 64-bit block index in the low two words; the high words select the stream.
  if (++counter_[0] == 0) ++counter_[1];
  used_ = 0;
}

RandomStream::result_type RandomStream::operator()() noexcept {
  if (used_ >= 4) refill();
  const std::uint64_t value = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return value;
}

double RandomStream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

double RandomStream::exponential() noexcept { return -std::log(uniform()); }

double RandomStream::gamma(double shape) noexcept {
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a), done on the log scale so tiny shapes stay positive.
    const double boosted = gamma(shape + 1.0);
    const double log_value = std::log(boosted) + std::log(uniform()) / shape;
    return std::max(std::exp(log_value), std::numeric_limits<double>::min());
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RandomStream::beta(double alpha, double beta_param) noexcept {
  const double x = gamma(alpha);
  const double y = gamma(beta_param);
  return x / (x + y);
}

std::uint64_t RandomStream::binomial(std::uint64_t trials, double p) noexcept {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  std::uint64_t successes = 0;
  if (static_cast<double>(trials) * q < 30.0) {
    // Sequential inversion on the pmf recurrence.
    const double ratio = q / (1.0 - q);
    double mass = std::pow(1.0 - q, static_cast<double>(trials));
    double u = uniform();
    std::uint64_t k = 0;
    while (u > mass && k < trials) {
      u -= mass;
      mass *= ratio * static_cast<double>(trials - k) / static_cast<double>(k + 1);
      ++k;
    }
    successes = k;
  } else {
    for (std::uint64_t t = 0; t < trials; ++t) successes += uniform() < q ? 1u : 0u;
  }
  return flip ? trials - successes : successes;
}

} // namespace nsum
