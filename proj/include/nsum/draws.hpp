#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nsum {

enum class Engine { mh, gibbs, mc };

std::string_view engine_name(Engine engine) noexcept;
/// Parses "mh", "gibbs" or "mc"; throws ValidationError otherwise.
Engine parse_engine(std::string_view name);

struct DrawMetadata {
  Engine engine = Engine::gibbs;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;  // sampler iterations per chain, including burn-in
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  double seconds = 0.0;        // wall-clock time of the whole run
  std::string config_hash;
  /// Named event counters, e.g. clamped Beta contributions in the Monte Carlo engine.
  std::map<std::string, std::uint64_t> warnings;
  /// Post-burn-in acceptance rate per respondent (random-walk engine only).
  std::vector<double> acceptance_rates;

  friend bool operator==(const DrawMetadata&, const DrawMetadata&) = default;
};

/// Posterior draws indexed by (chain, stored iteration, parameter).
///
/// Parameters are the unknown-population frequencies followed by the
/// respondent degrees. Storage is row-major with one row per
/// (chain, iteration).
class DrawMatrix {
public:
  DrawMatrix() = default;
  DrawMatrix(std::size_t chains, std::size_t iterations, std::size_t frequencies, std::size_t degrees,
             DrawMetadata metadata = {});

  std::size_t chains() const noexcept { return chains_; }
  std::size_t iterations() const noexcept { return iterations_; }
  std::size_t frequencies() const noexcept { return frequencies_; }
  std::size_t degrees() const noexcept { return degrees_; }
  std::size_t parameters() const noexcept { return frequencies_ + degrees_; }
  std::size_t total_draws() const noexcept { return chains_ * iterations_; }
  bool empty() const noexcept { return values_.empty(); }

  std::size_t theta_index(std::size_t u) const noexcept { return u; }
  std::size_t delta_index(std::size_t i) const noexcept { return frequencies_ + i; }

  double& at(std::size_t chain, std::size_t iteration, std::size_t parameter) noexcept {
    return values_[(chain * iterations_ + iteration) * parameters() + parameter];
  }
  double at(std::size_t chain, std::size_t iteration, std::size_t parameter) const noexcept {
    return values_[(chain * iterations_ + iteration) * parameters() + parameter];
  }

  /// Draws of one parameter within one chain, in iteration order.
  std::vector<double> chain_trace(std::size_t chain, std::size_t parameter) const;
  /// Draws of one parameter over all chains, chain-major.
  std::vector<double> pooled(std::size_t parameter) const;
  /// Per-chain traces of one parameter.
  std::vector<std::vector<double>> traces(std::size_t parameter) const;

  /// "theta[u]" or "delta[i]".
  std::string parameter_name(std::size_t parameter) const;
  /// Inverse of parameter_name.
  std::optional<std::size_t> parameter_index(std::string_view name) const;

  DrawMetadata& metadata() noexcept { return metadata_; }
  const DrawMetadata& metadata() const noexcept { return metadata_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const DrawMatrix&, const DrawMatrix&) = default;

private:
  std::size_t chains_ = 0;
  std::size_t iterations_ = 0;
  std::size_t frequencies_ = 0;
  std::size_t degrees_ = 0;
  std::vector<double> values_;
  DrawMetadata metadata_;
};

} // namespace nsum
