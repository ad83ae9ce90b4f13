#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "nsum/errors.hpp"
#include "nsum/samplers.hpp"

namespace nsum {

void RunConfig::validate() const {
  if (chains == 0) throw ValidationError("chains must be positive");
  if (iterations == 0) throw ValidationError("iterations must be positive");
  if (thin == 0) throw ValidationError("thin must be positive");
  if (burn_in >= iterations) throw ValidationError("burn-in must be smaller than the iteration count");
  if (stored_per_chain() == 0) throw ValidationError("configuration stores no draws");
  if (!(mh_target_acceptance > 0.0 && mh_target_acceptance < 1.0)) {
    throw ValidationError("target acceptance must lie in (0, 1)");
  }
  if (!(mh_initial_step > 0.0)) throw ValidationError("initial step must be positive");
}

std::string RunConfig::hash() const {
  char canonical[256];
  std::snprintf(canonical, sizeof canonical, "engine=%s;chains=%zu;iterations=%zu;burn_in=%zu;thin=%zu;seed=%llu;"
                "target=%.17g;step=%.17g",
                std::string(engine_name(engine)).c_str(), chains, iterations, burn_in, thin,
                static_cast<unsigned long long>(seed), mh_target_acceptance, mh_initial_step);
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char* p = canonical; *p != '\0'; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

LatentState initialize_state(const SurveyData& data, const PriorSpec& prior) {
  prior.validate(data);
  const auto pi = pi_frequencies(data);
  const double pi_total = std::accumulate(pi.begin(), pi.end(), 0.0);
  LatentState state;
  state.delta.resize(data.respondents());
  for (std::size_t i = 0; i < data.respondents(); ++i) {
    const double ratio = static_cast<double>(data.known_row_sum(i)) / pi_total;
    state.delta[i] = std::max(static_cast<double>(data.max_count(i)) + 1.0, ratio);
  }
  const double delta_total = std::accumulate(state.delta.begin(), state.delta.end(), 0.0);
  state.theta.resize(data.unknown_count());
  for (std::size_t u = 0; u < data.unknown_count(); ++u) {
    const double estimate = static_cast<double>(data.unknown_column_sum(u)) / delta_total;
    state.theta[u] = std::clamp(estimate, 1e-8, 1.0 - 1e-8);
  }
  return state;
}

std::vector<RandomStream> chain_streams(std::uint64_t seed, std::size_t chain, std::size_t respondents) {
  std::vector<RandomStream> streams;
  const auto c = static_cast<std::uint32_t>(chain);
  streams.emplace_back(seed, c, stream_id::theta);
  const std::size_t blocks = (respondents + stream_id::respondent_block - 1) / stream_id::respondent_block;
  for (std::size_t b = 0; b < blocks; ++b) {
    streams.emplace_back(seed, c, stream_id::degree_block(b * stream_id::respondent_block));
  }
  return streams;
}

DrawMatrix run_engine(const SurveyData& data, const PriorSpec& prior, const RunConfig& config,
                      const RunHooks& hooks) {
  switch (config.engine) {
  case Engine::mh: return run_mh(data, prior, config, hooks);
  case Engine::gibbs: return run_gibbs(data, prior, config, hooks);
  case Engine::mc: return run_mc(data, prior, config, hooks);
  }
  throw ValidationError("unknown engine");
}

namespace detail {

void for_each_chain(std::size_t chains, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, chains);
  if (workers == 1) {
    for (std::size_t c = 0; c < chains; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chains; c = next++) {
          try {
            body(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

} // namespace detail

} // namespace nsum
