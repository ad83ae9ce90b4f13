#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsum/diagnostics.hpp"
#include "nsum/samplers.hpp"
#include "nsum/synthetic.hpp"

namespace nsum::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitDiagnostics = 2;

struct EstimateOptions {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::filesystem::path out_dir = ".";
  std::vector<Engine> engines{Engine::gibbs};
  RunConfig config;
  double level = 0.95;
  double degree_shape = 2.0;
  double degree_rate = 0.01;
  bool strict = true;
  double agreement_tolerance = 0.05;  // relative, for the cross-engine table
  DiagnosticsThresholds thresholds;
  int verbosity = 0;
};

struct SimulateOptions {
  SyntheticSpec spec;
  std::filesystem::path out_dir = ".";
};

struct DiagnoseOptions {
  std::filesystem::path draws;
  std::optional<std::filesystem::path> out;
  DiagnosticsThresholds thresholds;
  bool strict = false;
};

struct BenchmarkOptions {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::optional<std::filesystem::path> out_dir;
  std::size_t draw_count = 80'000;
  std::vector<Engine> engines{Engine::mh, Engine::gibbs, Engine::mc};
  RunConfig config;  // chains, thin, seed and parallelism are taken from here
  double degree_shape = 2.0;
  double degree_rate = 0.01;
};

struct BenchmarkRow {
  Engine engine;
  std::size_t draws;          // MC draws, or iterations per chain for the MCMC engines
  std::size_t chains;
  double seconds;
  double min_theta_ess;       // smallest frequency ESS over stored draws; 0 when not computable
  double ess_per_second;
};

/// Per-engine run layout used by the benchmark for `draw_count` draws.
///
/// MCMC engines run `config.chains` chains of draw_count iterations with a
/// burn-in of draw_count / 8 and the configured thinning, reduced if needed
/// so each chain stores at least 100 draws. The Monte Carlo engine draws
/// draw_count values in one stream with no burn-in or thinning.
RunConfig benchmark_config(Engine engine, std::size_t draw_count, const RunConfig& base);

std::vector<BenchmarkRow> run_benchmark(const SurveyData& data, const PriorSpec& prior,
                                        const BenchmarkOptions& options, std::ostream* log = nullptr);

int cmd_estimate(const EstimateOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);
int cmd_diagnose(const DiagnoseOptions& options, std::ostream& out, std::ostream& err);
int cmd_benchmark(const BenchmarkOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv (CLI11) and dispatches to a subcommand. Options can also be
/// set through NSUM_* environment variables (e.g. NSUM_SEED, NSUM_CHAINS).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nsum::cli
