#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "nsum/samplers.hpp"

namespace nsum {

namespace {

// Robbins-Monro gain for burn-in step adaptation.
double adaptation_gain(std::size_t iteration) { return std::pow(static_cast<double>(iteration), -0.6); }

} // namespace

DrawMatrix run_mh(const SurveyData& data, const PriorSpec& prior, const RunConfig& config, const RunHooks& hooks) {
  config.validate();
  prior.validate(data);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.respondents();
  const GibbsKernel conjugate(data, prior);
  const LatentState initial = initialize_state(data, prior);

  std::vector<DegreeCountTerm> count_terms;
  count_terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) count_terms.emplace_back(data, i);
  double log1m_pi_total = 0.0;
  for (double p : pi_frequencies(data)) log1m_pi_total += std::log1p(-p);

  DrawMetadata meta;
  meta.engine = Engine::mh;
  meta.seed = config.seed;
  meta.iterations = config.iterations;
  meta.burn_in = config.burn_in;
  meta.thin = config.thin;
  meta.config_hash = config.hash();
  DrawMatrix draws(config.chains, config.stored_per_chain(), data.unknown_count(), n, meta);
  std::vector<std::vector<std::size_t>> accepted(config.chains, std::vector<std::size_t>(n, 0));

  detail::for_each_chain(config.chains, config.parallel, [&](std::size_t chain) {
    auto streams = chain_streams(config.seed, chain, n);
    LatentState state = initial;
    std::vector<double> log_step(n, std::log(config.mh_initial_step));
    std::vector<double> count_term(n);
    for (std::size_t i = 0; i < n; ++i) count_term[i] = count_terms[i](state.delta[i]);
    auto& chain_accepted = accepted[chain];
    std::size_t stored = 0;

    for (std::size_t t = 1; t <= config.iterations; ++t) {
      conjugate.update_theta(state, streams[0]);
      double slope = log1m_pi_total;
      for (double theta : state.theta) slope += std::log1p(-theta);

      const bool adapting = t <= config.burn_in;
      std::size_t accepted_now = 0;
      for (std::size_t i = 0; i < n; ++i) {
        RandomStream& rng = streams[stream_id::degree_block(i)];
        const double current = state.delta[i];
        const double log_current = std::log(current);
        const double log_proposed = log_current + std::exp(log_step[i]) * rng.normal();
        const double proposed = std::exp(log_proposed);
        const double proposed_term = count_terms[i](proposed);
        // Log target on the log-degree scale: likelihood + Gamma(c, d) prior + Jacobian.
        const double log_ratio = proposed_term - count_term[i] + (proposed - current) * (slope - prior.d[i]) +
                                 prior.c[i] * (log_proposed - log_current);
        const bool accept = std::log(rng.uniform()) < log_ratio;
        if (accept) {
          state.delta[i] = proposed;
          count_term[i] = proposed_term;
          ++accepted_now;
        }
        if (adapting) {
          const double accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
          log_step[i] += adaptation_gain(t) * (accept_prob - config.mh_target_acceptance);
        } else if (accept) {
          ++chain_accepted[i];
        }
      }

      if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 && stored < draws.iterations()) {
        for (std::size_t u = 0; u < state.theta.size(); ++u) draws.at(chain, stored, draws.theta_index(u)) = state.theta[u];
        for (std::size_t i = 0; i < n; ++i) draws.at(chain, stored, draws.delta_index(i)) = state.delta[i];
        ++stored;
      }
      if (hooks.progress && hooks.progress_every > 0 && t % hooks.progress_every == 0) {
        hooks.progress({chain, t, config.iterations, static_cast<double>(accepted_now) / static_cast<double>(n)});
      }
    }
  });

  const double kept_iterations = static_cast<double>(config.chains * (config.iterations - config.burn_in));
  auto& rates = draws.metadata().acceptance_rates;
  rates.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t total = 0;
    for (const auto& chain_accepted : accepted) total += chain_accepted[i];
    rates[i] = static_cast<double>(total) / kept_iterations;
  }
  draws.metadata().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return draws;
}

} // namespace nsum
