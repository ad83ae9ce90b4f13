#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nsum/draws.hpp"
#include "nsum/model.hpp"
#include "nsum/random.hpp"

namespace nsum {

/// Engine choice and chain layout.
///
/// Each chain runs `iterations` sweeps, discards the first `burn_in` and
/// keeps every `thin`-th of the rest, so it stores
/// floor((iterations - burn_in) / thin) draws. The Monte Carlo engine has
/// no burn-in of its own; it produces the same number of draws per chain
/// so all engines are compared at equal output size.
struct RunConfig {
  Engine engine = Engine::gibbs;
  std::size_t chains = 4;
  std::size_t iterations = 80'000;
  std::size_t burn_in = 10'000;
  std::size_t thin = 70;
  std::uint64_t seed = 20'160'101;
  double mh_target_acceptance = 0.44;
  double mh_initial_step = 0.5;  // proposal sd on the log-degree scale
  std::size_t parallel = 1;      // worker threads; chains never share state

  void validate() const;
  std::size_t stored_per_chain() const noexcept { return (iterations - burn_in) / thin; }
  /// Stable hex digest of every field that affects the draws.
  std::string hash() const;
};

struct Progress {
  std::size_t chain;
  std::size_t iteration;
  std::size_t iterations;
  double acceptance;  // mean over respondents; random-walk engine only, else 0
};

struct RunHooks {
  /// Called from worker threads; must be safe to call concurrently.
  std::function<void(const Progress&)> progress;
  std::size_t progress_every = 1000;
};

/// Classical scale-up starting point: degree max(M_i + 1, sum_k x_ik / sum_k pi_k),
/// frequency sum_i y_iu / sum_i degree clamped to (1e-8, 1 - 1e-8).
LatentState initialize_state(const SurveyData& data, const PriorSpec& prior);

/// One Gibbs sweep split into its two conditional updates.
class GibbsKernel {
public:
  GibbsKernel(const SurveyData& data, const PriorSpec& prior);

  /// Draws every frequency from its Beta full conditional given `state.delta`.
  void update_theta(LatentState& state, RandomStream& rng) const;
  /// Draws every degree from its truncated-Gamma full conditional given `state.theta`.
  /// `streams[b]` serves respondent block b (see stream_id::degree_block).
  void update_degrees(LatentState& state, std::span<RandomStream> streams) const;

  std::size_t degree_blocks() const noexcept;

private:
  const SurveyData& data_;
  const PriorSpec& prior_;
  std::vector<double> unknown_totals_;
  std::vector<double> shapes_;
  std::vector<double> lowers_;
  double pi_total_;
};

/// Streams for one chain: the frequency stream followed by one per respondent block.
std::vector<RandomStream> chain_streams(std::uint64_t seed, std::size_t chain, std::size_t respondents);

DrawMatrix run_gibbs(const SurveyData& data, const PriorSpec& prior, const RunConfig& config,
                     const RunHooks& hooks = {});
DrawMatrix run_mc(const SurveyData& data, const PriorSpec& prior, const RunConfig& config,
                  const RunHooks& hooks = {});
DrawMatrix run_mh(const SurveyData& data, const PriorSpec& prior, const RunConfig& config,
                  const RunHooks& hooks = {});

/// Dispatches on config.engine.
DrawMatrix run_engine(const SurveyData& data, const PriorSpec& prior, const RunConfig& config,
                      const RunHooks& hooks = {});

namespace detail {

/// Runs body(chain) for every chain on up to `workers` threads, rethrowing the first failure.
void for_each_chain(std::size_t chains, std::size_t workers, const std::function<void(std::size_t)>& body);

} // namespace detail

} // namespace nsum
