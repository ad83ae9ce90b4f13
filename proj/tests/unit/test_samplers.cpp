#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nsum/diagnostics.hpp"
#include "nsum/errors.hpp"
#include "nsum/samplers.hpp"
#include "nsum/summary.hpp"
#include "nsum/synthetic.hpp"
#include "stats.hpp"

using namespace nsum;

namespace {

const SyntheticSurvey& recovery_fixture() {
  static const SyntheticSurvey survey = [] {
    SyntheticSpec spec = default_synthetic_spec(500, 20, 2, 2024);
    spec.theta = {0.005, 0.02};
    return generate_synthetic(spec);
  }();
  return survey;
}

SurveyData tiny_instance() {
  // n = 3, K = 1, U = 1; frequencies and prior mean degree in the small-rate regime.
  return SurveyData(CountMatrix(3, 1, {2, 1, 3}), CountMatrix(3, 1, {1, 0, 2}), {8000}, 1e6);
}

RunConfig small_config(Engine engine, std::size_t iterations = 600, std::size_t burn_in = 100, std::size_t thin = 2) {
  RunConfig c;
  c.engine = engine;
  c.chains = 2;
  c.iterations = iterations;
  c.burn_in = burn_in;
  c.thin = thin;
  c.seed = 77;
  return c;
}

} // namespace

TEST_CASE("run configuration validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.stored_per_chain() == 1000);
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = RunConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = RunConfig{};
  c.mh_target_acceptance = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(RunConfig{}.hash() == RunConfig{}.hash());
  RunConfig d;
  d.seed = 1;
  CHECK(RunConfig{}.hash() != d.hash());
}

TEST_CASE("initialization examples") {
  const SurveyData data(CountMatrix(2, 2, {2, 3, 0, 0}), CountMatrix(2, 1, {1, 0}), {50, 50}, 1000);
  const auto s = initialize_state(data, PriorSpec::defaults(data));
  CHECK(s.delta[0] == doctest::Approx(50.0));
  CHECK(s.delta[1] == 1.0);
  CHECK(s.theta[0] == doctest::Approx(1.0 / 51.0));

  const auto& f = recovery_fixture();
  const auto init = initialize_state(f.data, PriorSpec::defaults(f.data));
  std::size_t close = 0;
  for (std::size_t i = 0; i < f.data.respondents(); ++i) {
    const double ratio = init.delta[i] / f.truth.delta[i];
    if (ratio >= 0.1 && ratio <= 10.0) ++close;
  }
  CHECK(close >= 0.95 * f.data.respondents());
}

TEST_CASE("every engine is deterministic and respects the support") {
  const auto& f = recovery_fixture();
  const auto prior = PriorSpec::defaults(f.data);
  for (Engine e : {Engine::gibbs, Engine::mh, Engine::mc}) {
    CAPTURE(engine_name(e));
    const auto config = small_config(e, 300, 50, 5);
    auto a = run_engine(f.data, prior, config);
    auto b = run_engine(f.data, prior, config);
    a.metadata().seconds = b.metadata().seconds = 0.0;
    CHECK(a == b);
    CHECK(a.iterations() == (300 - 50) / 5);
    CHECK(a.chains() == 2);
    for (std::size_t c = 0; c < a.chains(); ++c) {
      for (std::size_t t = 0; t < a.iterations(); ++t) {
        for (std::size_t u = 0; u < a.frequencies(); ++u) {
          const double th = a.at(c, t, a.theta_index(u));
          REQUIRE(th > 0.0);
          REQUIRE(th < 1.0);
        }
        for (std::size_t i = 0; i < a.degrees(); ++i) {
          const double d = a.at(c, t, a.delta_index(i));
          const double bound = e == Engine::mc ? static_cast<double>(f.data.max_known_count(i))
                                               : static_cast<double>(f.data.max_count(i));
          REQUIRE(d > bound);
        }
      }
    }
  }
}

TEST_CASE("chain results do not depend on the worker count") {
  const auto& f = recovery_fixture();
  const auto prior = PriorSpec::defaults(f.data);
  for (Engine e : {Engine::gibbs, Engine::mh, Engine::mc}) {
    auto serial = small_config(e, 200, 20, 3);
    auto parallel = serial;
    parallel.parallel = 2;
    auto a = run_engine(f.data, prior, serial);
    auto b = run_engine(f.data, prior, parallel);
    a.metadata().seconds = b.metadata().seconds = 0.0;
    CHECK(a == b);
  }
}

TEST_CASE("gibbs recovers synthetic truth") {
  const auto& f = recovery_fixture();
  const auto draws = run_gibbs(f.data, PriorSpec::defaults(f.data), small_config(Engine::gibbs, 2000, 300, 2));
  for (std::size_t u = 0; u < 2; ++u) {
    const auto v = draws.pooled(draws.theta_index(u));
    CHECK(std::abs(testing::mean(v) - f.truth.theta[u]) < 4.0 * std::sqrt(testing::variance(v)));
  }
}

TEST_CASE("monte carlo agrees with gibbs and is independent across draws") {
  const auto& f = recovery_fixture();
  const auto prior = PriorSpec::defaults(f.data);
  const auto gibbs = run_gibbs(f.data, prior, small_config(Engine::gibbs, 2000, 300, 2));
  RunConfig mc_config = small_config(Engine::mc, 2000, 0, 1);
  mc_config.chains = 2;
  const auto mc = run_mc(f.data, prior, mc_config);
  CHECK(mc.metadata().warnings.count("mc_degree_below_count") == 1);
  for (std::size_t u = 0; u < 2; ++u) {
    const double g = testing::mean(gibbs.pooled(u));
    const double m = testing::mean(mc.pooled(u));
    CHECK(std::abs(m - g) / g < 0.05);
    const auto trace = mc.chain_trace(0, u);
    CHECK(std::abs(autocorrelation(trace, 1)) < 0.05);
  }
}

TEST_CASE("random-walk acceptance is adapted into a sensible band") {
  const auto& f = recovery_fixture();
  const auto draws = run_mh(f.data, PriorSpec::defaults(f.data), small_config(Engine::mh, 3000, 1000, 5));
  const auto& rates = draws.metadata().acceptance_rates;
  REQUIRE(rates.size() == f.data.respondents());
  const double mean_rate = testing::mean(rates);
  CHECK(mean_rate > 0.2);
  CHECK(mean_rate < 0.6);
}

TEST_CASE("gibbs and random-walk engines agree on a tiny exact instance") {
  const auto data = tiny_instance();
  const auto prior = PriorSpec::defaults(data);
  RunConfig config = small_config(Engine::gibbs, 60000, 2000, 4);
  config.chains = 4;
  const auto gibbs = run_gibbs(data, prior, config);
  config.engine = Engine::mh;
  const auto mh = run_mh(data, prior, config);
  const auto gt = gibbs.traces(0), mt = mh.traces(0);
  double gm = 0.0, mm = 0.0;
  for (const auto& c : gt) gm += testing::mean(c) / gt.size();
  for (const auto& c : mt) mm += testing::mean(c) / mt.size();
  const double se = std::hypot(monte_carlo_standard_error(gt), monte_carlo_standard_error(mt));
  CHECK(std::abs(gm - mm) < 3.0 * se);
}

TEST_CASE("gibbs degree marginal matches the exact-likelihood random-walk oracle") {
  const auto data = tiny_instance();
  const auto prior = PriorSpec::defaults(data);
  RunConfig config = small_config(Engine::gibbs, 100000, 2000, 10);
  config.chains = 4;
  const auto gibbs = run_gibbs(data, prior, config);
  config.engine = Engine::mh;
  config.thin = 20;
  config.iterations = 200000;
  const auto mh = run_mh(data, prior, config);
  for (std::size_t i = 0; i < data.respondents(); ++i) {
    CAPTURE(i);
    CHECK(testing::ks_two_sample(gibbs.pooled(gibbs.delta_index(i)), mh.pooled(mh.delta_index(i))) < 0.02);
  }
}

TEST_CASE("frozen-degree theta updates follow the analytic Beta") {
  const auto data = tiny_instance();
  const auto prior = PriorSpec::defaults(data);
  const GibbsKernel kernel(data, prior);
  LatentState state{{0.01}, {120.0, 80.0, 300.0}};
  const auto law = theta_full_conditional(data, state.delta, 0, prior);
  RandomStream rng(4, 0, 0);
  std::vector<double> v(10000);
  for (double& x : v) {
    kernel.update_theta(state, rng);
    x = state.theta[0];
  }
  CHECK(testing::mean(v) == doctest::Approx(law.alpha / (law.alpha + law.beta)).epsilon(0.02));
}

TEST_CASE("size quantiles are exactly N times frequency quantiles") {
  const auto& f = recovery_fixture();
  const auto draws = run_mc(f.data, PriorSpec::defaults(f.data), small_config(Engine::mc, 500, 0, 1));
  const auto s = summarize(draws, f.data, 0.9);
  for (const auto& p : s.populations) {
    CHECK(p.size.lower == f.data.total_population() * p.frequency.lower);
    CHECK(p.size.upper == f.data.total_population() * p.frequency.upper);
    CHECK(p.size.median == f.data.total_population() * p.frequency.median);
    CHECK(p.size.mean == f.data.total_population() * p.frequency.mean);
  }
}

TEST_CASE("progress hooks report iterations") {
  const auto data = tiny_instance();
  std::size_t calls = 0;
  RunHooks hooks;
  hooks.progress_every = 100;
  hooks.progress = [&](const Progress& p) {
    ++calls;
    CHECK(p.iterations == 500);
  };
  RunConfig config = small_config(Engine::gibbs, 500, 100, 1);
  config.chains = 1;
  run_gibbs(data, PriorSpec::defaults(data), config, hooks);
  CHECK(calls == 5);
}
