#include <chrono>
#include <numeric>

#include "nsum/samplers.hpp"
#include "nsum/trunc_gamma.hpp"

namespace nsum {

GibbsKernel::GibbsKernel(const SurveyData& data, const PriorSpec& prior) : data_(data), prior_(prior) {
  prior_.validate(data_);
  unknown_totals_.resize(data_.unknown_count());
  for (std::size_t u = 0; u < unknown_totals_.size(); ++u) {
    unknown_totals_[u] = static_cast<double>(data_.unknown_column_sum(u));
  }
  shapes_.resize(data_.respondents());
  lowers_.resize(data_.respondents());
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    shapes_[i] = static_cast<double>(data_.unknown_row_sum(i) + data_.known_row_sum(i)) + prior_.c[i];
    lowers_[i] = static_cast<double>(data_.max_count(i));
  }
  const auto pi = pi_frequencies(data_);
  pi_total_ = std::accumulate(pi.begin(), pi.end(), 0.0);
}

std::size_t GibbsKernel::degree_blocks() const noexcept {
  return (data_.respondents() + stream_id::respondent_block - 1) / stream_id::respondent_block;
}

void GibbsKernel::update_theta(LatentState& state, RandomStream& rng) const {
  // sum_i (delta_i - y_iu) = sum_i delta_i - sum_i y_iu
  const double delta_total = std::accumulate(state.delta.begin(), state.delta.end(), 0.0);
  for (std::size_t u = 0; u < unknown_totals_.size(); ++u) {
    const double alpha = unknown_totals_[u] + prior_.a[u];
    const double beta = delta_total - unknown_totals_[u] + prior_.b[u];
    state.theta[u] = rng.beta(alpha, beta);
  }
}

void GibbsKernel::update_degrees(LatentState& state, std::span<RandomStream> streams) const {
  const double theta_total = std::accumulate(state.theta.begin(), state.theta.end(), 0.0);
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const TruncGammaParams params{shapes_[i], theta_total + pi_total_ + prior_.d[i], lowers_[i]};
    state.delta[i] = sample_trunc_gamma(params, streams[i / stream_id::respondent_block]);
  }
}

DrawMatrix run_gibbs(const SurveyData& data, const PriorSpec& prior, const RunConfig& config,
                     const RunHooks& hooks) {
  config.validate();
  prior.validate(data);
  const auto start = std::chrono::steady_clock::now();
  const GibbsKernel kernel(data, prior);
  const LatentState initial = initialize_state(data, prior);

  DrawMetadata meta;
  meta.engine = Engine::gibbs;
  meta.seed = config.seed;
  meta.iterations = config.iterations;
  meta.burn_in = config.burn_in;
  meta.thin = config.thin;
  meta.config_hash = config.hash();
  DrawMatrix draws(config.chains, config.stored_per_chain(), data.unknown_count(), data.respondents(), meta);

  detail::for_each_chain(config.chains, config.parallel, [&](std::size_t chain) {
    auto streams = chain_streams(config.seed, chain, data.respondents());
    auto degree_streams = std::span(streams).subspan(1);
    LatentState state = initial;
    std::size_t stored = 0;
    for (std::size_t t = 1; t <= config.iterations; ++t) {
      kernel.update_theta(state, streams[0]);
      kernel.update_degrees(state, degree_streams);
      if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 && stored < draws.iterations()) {
        for (std::size_t u = 0; u < state.theta.size(); ++u) draws.at(chain, stored, draws.theta_index(u)) = state.theta[u];
        for (std::size_t i = 0; i < state.delta.size(); ++i) draws.at(chain, stored, draws.delta_index(i)) = state.delta[i];
        ++stored;
      }
      if (hooks.progress && hooks.progress_every > 0 && t % hooks.progress_every == 0) {
        hooks.progress({chain, t, config.iterations, 0.0});
      }
    }
  });

  draws.metadata().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return draws;
}

} // namespace nsum
