#include <atomic>
#include <chrono>
#include <numeric>

#include "nsum/samplers.hpp"
#include "nsum/trunc_gamma.hpp"

namespace nsum {

namespace {

constexpr const char* kClampCounter = "mc_degree_below_count";

} // namespace

DrawMatrix run_mc(const SurveyData& data, const PriorSpec& prior, const RunConfig& config, const RunHooks& hooks) {
  config.validate();
  prior.validate(data);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.respondents();
  const std::size_t U = data.unknown_count();

  // Degrees learn only from the known populations: Gamma(sum_k x_ik + c_i,
  // sum_k N_k / N + d_i) truncated at m_i = max_k x_ik. Fixed over all draws.
  const auto pi = pi_frequencies(data);
  const double pi_total = std::accumulate(pi.begin(), pi.end(), 0.0);
  std::vector<TruncGammaSampler> degree_samplers;
  degree_samplers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    degree_samplers.emplace_back(TruncGammaParams{static_cast<double>(data.known_row_sum(i)) + prior.c[i],
                                                  pi_total + prior.d[i],
                                                  static_cast<double>(data.max_known_count(i))});
  }

  // Only respondents with y_iu above their known-population maximum can draw a degree below y_iu.
  std::vector<std::vector<std::size_t>> at_risk(U);
  std::vector<double> unknown_totals(U);
  for (std::size_t u = 0; u < U; ++u) {
    unknown_totals[u] = static_cast<double>(data.unknown_column_sum(u));
    for (std::size_t i = 0; i < n; ++i) {
      if (data.unknown()(i, u) > data.max_known_count(i)) at_risk[u].push_back(i);
    }
  }

  DrawMetadata meta;
  meta.engine = Engine::mc;
  meta.seed = config.seed;
  meta.iterations = config.iterations;
  meta.burn_in = config.burn_in;
  meta.thin = config.thin;
  meta.config_hash = config.hash();
  DrawMatrix draws(config.chains, config.stored_per_chain(), U, n, meta);
  const std::size_t M = draws.iterations();

  const std::size_t blocks = (n + stream_id::respondent_block - 1) / stream_id::respondent_block;
  detail::for_each_chain(config.chains * blocks, config.parallel, [&](std::size_t task) {
    const std::size_t chain = task / blocks;
    const std::size_t block = task % blocks;
    const std::size_t first = block * stream_id::respondent_block;
    const std::size_t last = std::min(n, first + stream_id::respondent_block);
    RandomStream rng(config.seed, static_cast<std::uint32_t>(chain), stream_id::degree_block(first));
    for (std::size_t i = first; i < last; ++i) {
      const auto& sampler = degree_samplers[i];
      for (std::size_t m = 0; m < M; ++m) draws.at(chain, m, draws.delta_index(i)) = sampler(rng);
    }
  });

  std::atomic<std::uint64_t> clamped{0};
  detail::for_each_chain(config.chains, config.parallel, [&](std::size_t chain) {
    RandomStream rng(config.seed, static_cast<std::uint32_t>(chain), stream_id::theta);
    std::uint64_t local_clamped = 0;
    for (std::size_t m = 0; m < M; ++m) {
      double delta_total = 0.0;
      for (std::size_t i = 0; i < n; ++i) delta_total += draws.at(chain, m, draws.delta_index(i));
      for (std::size_t u = 0; u < U; ++u) {
        // sum_i max(delta_i - y_iu, 0): negative contributions are clamped to zero and counted.
        double remainder = delta_total - unknown_totals[u];
        for (std::size_t i : at_risk[u]) {
          const double deficit = static_cast<double>(data.unknown()(i, u)) - draws.at(chain, m, draws.delta_index(i));
          if (deficit > 0.0) {
            remainder += deficit;
            ++local_clamped;
          }
        }
        draws.at(chain, m, draws.theta_index(u)) =
            rng.beta(unknown_totals[u] + prior.a[u], remainder + prior.b[u]);
      }
      if (hooks.progress && hooks.progress_every > 0 && (m + 1) % hooks.progress_every == 0) {
        hooks.progress({chain, m + 1, M, 0.0});
      }
    }
    clamped += local_clamped;
  });

  draws.metadata().warnings[kClampCounter] = clamped.load();
  draws.metadata().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return draws;
}

} // namespace nsum
