#include "nsum/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsum/draws_io.hpp"
#include "nsum/errors.hpp"
#include "nsum/summary.hpp"
#include "nsum/survey_io.hpp"

namespace nsum::cli {

using json = nlohmann::json;

namespace {

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text << '\n';
}

RunHooks progress_hooks(int verbosity, std::ostream& err) {
  RunHooks hooks;
  if (verbosity <= 0) return hooks;
  auto mutex = std::make_shared<std::mutex>();
  hooks.progress_every = 10'000;
  hooks.progress = [mutex, &err](const Progress& p) {
    std::lock_guard lock(*mutex);
    err << "chain " << p.chain << ": " << p.iteration << '/' << p.iterations;
    if (p.acceptance > 0.0) err << " acceptance " << std::fixed << std::setprecision(3) << p.acceptance;
    err << '\n';
  };
  return hooks;
}

std::vector<std::size_t> theta_parameters(const DrawMatrix& draws) {
  std::vector<std::size_t> ids(draws.frequencies());
  for (std::size_t u = 0; u < ids.size(); ++u) ids[u] = draws.theta_index(u);
  return ids;
}

double min_theta_ess(const DrawMatrix& draws) {
  double smallest = 0.0;
  bool any = false;
  for (std::size_t p : theta_parameters(draws)) {
    try {
      const double ess = effective_sample_size(draws.traces(p));
      smallest = any ? std::min(smallest, ess) : ess;
      any = true;
    } catch (const std::exception&) {
      return 0.0;
    }
  }
  return smallest;
}

} // namespace

int cmd_estimate(const EstimateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const SurveyData data = load_survey_csv(options.data, load_schema(options.schema));
    for (const auto& w : data.warnings()) err << "warning: " << w << '\n';
    const PriorSpec prior = PriorSpec::defaults(data, options.degree_shape, options.degree_rate);
    ensure_directory(options.out_dir);

    bool flagged = false;
    std::vector<std::pair<Engine, SummaryDocument>> summaries;
    for (Engine engine : options.engines) {
      RunConfig config = options.config;
      config.engine = engine;
      const DrawMatrix draws = run_engine(data, prior, config, progress_hooks(options.verbosity, err));
      const DiagnosticsReport report = diagnose(draws, options.thresholds);
      const SummaryDocument summary = summarize(draws, data, options.level);
      const std::string name(engine_name(engine));

      write_text(options.out_dir / ("summary_" + name + ".json"), summary_to_json(summary, &report));
      write_text(options.out_dir / ("diagnostics_" + name + ".json"), diagnostics_to_json(report, draws.metadata()));
      export_draws(draws, options.out_dir / ("draws_" + name + ".csv"), DrawFormat::csv);
      export_plotdata(draws, data, options.out_dir / ("plotdata_" + name + ".csv"));

      out << name << " (" << std::fixed << std::setprecision(2) << draws.metadata().seconds << " s, seed "
          << config.seed << ", config " << config.hash() << ")\n";
      for (const auto& p : summary.populations) {
        out << "  " << p.label << ": size " << std::setprecision(0) << p.size.mean << " ("
            << options.level * 100.0 << "% CI " << p.size.lower << ", " << p.size.upper << ")\n";
      }
      out << "  mean degree " << std::setprecision(1) << summary.mean_degree << " (posterior means "
          << summary.min_degree_mean << " to " << summary.max_degree_mean << ")\n";
      for (const auto& [counter, count] : draws.metadata().warnings) {
        if (count > 0) err << "warning: " << name << ' ' << counter << " = " << count << '\n';
      }
      if (report.flagged()) {
        flagged = true;
        const auto names = report.flagged_parameters();
        err << "diagnostics: " << name << " flagged " << names.size() << " parameter(s), first "
            << names.front() << '\n';
      }
      summaries.emplace_back(engine, summary);
    }

    if (summaries.size() > 1) {
      json table = json::array();
      for (std::size_t a = 0; a < summaries.size(); ++a) {
        for (std::size_t b = a + 1; b < summaries.size(); ++b) {
          const auto& sa = summaries[a].second;
          const auto& sb = summaries[b].second;
          for (std::size_t u = 0; u < sa.populations.size(); ++u) {
            const double ma = sa.populations[u].frequency.mean;
            const double mb = sb.populations[u].frequency.mean;
            const double rel = std::abs(ma - mb) / std::max(std::abs(mb), 1e-300);
            table.push_back({{"engines", {engine_name(summaries[a].first), engine_name(summaries[b].first)}},
                             {"population", sa.populations[u].label},
                             {"means", {ma, mb}},
                             {"relative_difference", rel},
                             {"within_tolerance", rel <= options.agreement_tolerance}});
          }
        }
      }
      write_text(options.out_dir / "comparison.json",
                 json{{"tolerance", options.agreement_tolerance}, {"seed", options.config.seed}, {"pairs", table}}.dump(2));
    }
    if (flagged && options.strict) {
      report_error(err, "diagnostics", "convergence diagnostics flagged parameters (use --no-strict to ignore)");
      return kExitDiagnostics;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    report_error(err, "validation", e.what());
    return kExitInvalid;
  }
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto survey = generate_synthetic(options.spec);
    ensure_directory(options.out_dir);
    export_survey(survey.data, options.out_dir / "survey.csv", options.out_dir / "schema.json");
    json truth{{"seed", options.spec.seed},
               {"theta", survey.truth.theta},
               {"size", [&] {
                  std::vector<double> sizes;
                  for (double t : survey.truth.theta) sizes.push_back(t * options.spec.total_population);
                  return sizes;
                }()},
               {"delta", survey.truth.delta},
               {"rounded_degree", survey.truth.rounded_degree},
               {"degree_law", {{"shape", options.spec.degree_shape}, {"rate", options.spec.degree_rate}}}};
    write_text(options.out_dir / "truth.json", truth.dump(2));
    out << "wrote " << survey.data.respondents() << " respondents to " << (options.out_dir / "survey.csv").string()
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    report_error(err, "validation", e.what());
    return kExitInvalid;
  }
}

int cmd_diagnose(const DiagnoseOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const DrawMatrix draws = import_draws(options.draws);
    const DiagnosticsReport report = diagnose(draws, options.thresholds);
    const auto target = options.out.value_or(std::filesystem::path(options.draws).replace_extension(".diagnostics.json"));
    write_text(target, diagnostics_to_json(report, draws.metadata()));
    out << "chains " << report.chains << ", draws per chain " << report.draws_per_chain << '\n';
    if (report.chains < 2) out << "R-hat unavailable (single chain)\n";
    for (const auto& p : report.parameters) {
      if (p.raftery_lewis.empty()) continue;
      const auto& rl = p.raftery_lewis.front();
      if (rl.status == DiagnosticStatus::insufficient_draws) {
        out << "Raftery-Lewis: insufficient draws, need " << rl.result.min_draws << '\n';
        break;
      }
    }
    if (report.max_required) {
      out << "Raftery-Lewis: largest requirement " << *report.max_required << " (" << *report.max_required_parameter
          << ")\n";
    }
    out << "flagged parameters: " << report.flagged_parameters().size() << '\n';
    out << "report written to " << target.string() << '\n';
    if (options.strict && report.flagged()) return kExitDiagnostics;
    return kExitOk;
  } catch (const std::exception& e) {
    report_error(err, "validation", e.what());
    return kExitInvalid;
  }
}

RunConfig benchmark_config(Engine engine, std::size_t draw_count, const RunConfig& base) {
  RunConfig config = base;
  config.engine = engine;
  if (engine == Engine::mc) {
    config.chains = 1;
    config.iterations = draw_count;
    config.burn_in = 0;
    config.thin = 1;
    return config;
  }
  config.iterations = draw_count;
  config.burn_in = draw_count / 8;
  const std::size_t kept = draw_count - config.burn_in;
  config.thin = std::max<std::size_t>(1, std::min(base.thin, kept / 100));
  return config;
}

std::vector<BenchmarkRow> run_benchmark(const SurveyData& data, const PriorSpec& prior,
                                        const BenchmarkOptions& options, std::ostream* log) {
  std::vector<BenchmarkRow> rows;
  for (Engine engine : options.engines) {
    const RunConfig config = benchmark_config(engine, options.draw_count, options.config);
    const DrawMatrix draws = run_engine(data, prior, config);
    BenchmarkRow row{engine, options.draw_count, config.chains, draws.metadata().seconds, min_theta_ess(draws), 0.0};
    row.ess_per_second = row.seconds > 0.0 ? row.min_theta_ess / row.seconds : 0.0;
    if (log != nullptr) *log << engine_name(engine) << " done in " << row.seconds << " s\n";
    rows.push_back(row);
  }
  return rows;
}

int cmd_benchmark(const BenchmarkOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const SurveyData data = load_survey_csv(options.data, load_schema(options.schema));
    const PriorSpec prior = PriorSpec::defaults(data, options.degree_shape, options.degree_rate);
    const auto rows = run_benchmark(data, prior, options);

    std::ostringstream csv;
    csv << "engine,draws,chains,seconds,min_theta_ess,ess_per_second\n";
    out << std::left << std::setw(8) << "engine" << std::right << std::setw(10) << "draws" << std::setw(8) << "chains"
        << std::setw(12) << "seconds" << std::setw(14) << "min θ ESS" << std::setw(12) << "ESS/s" << '\n';
    for (const auto& r : rows) {
      out << std::left << std::setw(8) << engine_name(r.engine) << std::right << std::setw(10) << r.draws
          << std::setw(8) << r.chains << std::setw(12) << std::fixed << std::setprecision(3) << r.seconds
          << std::setw(14) << std::setprecision(1) << r.min_theta_ess << std::setw(12) << std::setprecision(1)
          << r.ess_per_second << '\n';
      csv << engine_name(r.engine) << ',' << r.draws << ',' << r.chains << ',' << format_double(r.seconds) << ','
          << format_double(r.min_theta_ess) << ',' << format_double(r.ess_per_second) << '\n';
    }
    if (options.out_dir) {
      ensure_directory(*options.out_dir);
      std::ofstream file(*options.out_dir / "benchmark.csv");
      file << "# seed=" << options.config.seed << " config_hash=" << options.config.hash() << '\n' << csv.str();
    }
    return kExitOk;
  } catch (const std::exception& e) {
    report_error(err, "validation", e.what());
    return kExitInvalid;
  }
}

namespace {

std::vector<Engine> expand_engines(const std::vector<std::string>& names) {
  std::vector<Engine> engines;
  for (const auto& name : names) {
    if (name == "all") {
      engines = {Engine::mh, Engine::gibbs, Engine::mc};
      return engines;
    }
    const Engine e = parse_engine(name);
    if (std::find(engines.begin(), engines.end(), e) == engines.end()) engines.push_back(e);
  }
  return engines;
}

void add_run_options(CLI::App& cmd, RunConfig& config, std::vector<std::string>& engines, bool with_engine) {
  if (with_engine) {
    cmd.add_option("--engine", engines, "mh, gibbs, mc or all (comma separated)")
        ->delimiter(',')
        ->check(CLI::IsMember({"mh", "gibbs", "mc", "all"}))
        ->envname("NSUM_ENGINE");
  }
  cmd.add_option("--chains", config.chains, "independent chains")->check(CLI::PositiveNumber)->envname("NSUM_CHAINS");
  cmd.add_option("--seed", config.seed, "64-bit seed")->envname("NSUM_SEED");
  cmd.add_option("--thin", config.thin, "keep every k-th iteration")->check(CLI::PositiveNumber)->envname("NSUM_THIN");
  cmd.add_option("--parallel", config.parallel, "worker threads")->check(CLI::PositiveNumber)->envname("NSUM_PARALLEL");
  cmd.add_option("--mh-target", config.mh_target_acceptance, "random-walk target acceptance")
      ->envname("NSUM_MH_TARGET");
  cmd.add_option("--mh-step", config.mh_initial_step, "initial random-walk step (log-degree scale)")
      ->envname("NSUM_MH_STEP");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network Scale-Up size estimation under the random-degree model"};
  app.require_subcommand(1);

  EstimateOptions estimate;
  std::vector<std::string> estimate_engines{"gibbs"};
  bool no_strict = false;
  auto* est = app.add_subcommand("estimate", "posterior estimation from a survey CSV");
  est->add_option("--data", estimate.data, "survey CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--schema", estimate.schema, "column schema JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--out-dir", estimate.out_dir, "output directory")->envname("NSUM_OUT_DIR");
  add_run_options(*est, estimate.config, estimate_engines, true);
  est->add_option("--iters", estimate.config.iterations, "iterations per chain")->check(CLI::PositiveNumber)->envname("NSUM_ITERS");
  est->add_option("--burnin", estimate.config.burn_in, "discarded iterations per chain")->envname("NSUM_BURNIN");
  est->add_option("--level", estimate.level, "credible interval level")->check(CLI::Range(0.0, 0.999999))->envname("NSUM_LEVEL");
  est->add_option("--degree-shape", estimate.degree_shape, "Gamma prior shape c for every degree")->envname("NSUM_DEGREE_SHAPE");
  est->add_option("--degree-rate", estimate.degree_rate, "Gamma prior rate d for every degree")->envname("NSUM_DEGREE_RATE");
  est->add_option("--agree-tol", estimate.agreement_tolerance, "relative tolerance of the engine comparison table");
  est->add_flag("--no-strict", no_strict, "exit 0 even if diagnostics flag parameters");
  est->add_flag("-v,--verbose", estimate.verbosity, "progress output");

  SimulateOptions simulate;
  simulate.spec = default_synthetic_spec(500, 20, 4, 1);
  std::size_t sim_known = 20, sim_unknown = 4;
  std::vector<double> sim_theta, sim_sizes;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic survey with known truth");
  sim->add_option("--respondents", simulate.spec.respondents, "n")->check(CLI::PositiveNumber);
  sim->add_option("--known", sim_known, "K (when --known-sizes is not given)")->check(CLI::PositiveNumber);
  sim->add_option("--unknown", sim_unknown, "U (when --theta is not given)")->check(CLI::PositiveNumber);
  sim->add_option("--theta", sim_theta, "true frequencies")->delimiter(',');
  sim->add_option("--known-sizes", sim_sizes, "known population sizes")->delimiter(',');
  sim->add_option("--total-population", simulate.spec.total_population, "N");
  sim->add_option("--degree-shape", simulate.spec.degree_shape, "Gamma shape c of the degrees");
  sim->add_option("--degree-rate", simulate.spec.degree_rate, "Gamma rate d of the degrees");
  sim->add_option("--seed", simulate.spec.seed, "64-bit seed")->envname("NSUM_SEED");
  sim->add_option("--out-dir", simulate.out_dir, "output directory")->envname("NSUM_OUT_DIR");

  DiagnoseOptions diag;
  auto* dia = app.add_subcommand("diagnose", "convergence diagnostics for an exported draw file");
  dia->add_option("draws", diag.draws, "draw CSV or JSONL")->required()->check(CLI::ExistingFile);
  dia->add_option("--out", diag.out, "report path");
  dia->add_flag("--strict", diag.strict, "exit 2 if any parameter is flagged");

  BenchmarkOptions bench;
  std::vector<std::string> bench_engines{"all"};
  std::filesystem::path bench_out;
  auto* ben = app.add_subcommand("benchmark", "wall-clock comparison of the engines at equal draw counts");
  ben->add_option("--data", bench.data, "survey CSV")->required()->check(CLI::ExistingFile);
  ben->add_option("--schema", bench.schema, "column schema JSON")->required()->check(CLI::ExistingFile);
  ben->add_option("--draws", bench.draw_count, "draws per engine")->check(CLI::PositiveNumber);
  ben->add_option("--out-dir", bench_out, "write benchmark.csv here")->envname("NSUM_OUT_DIR");
  add_run_options(*ben, bench.config, bench_engines, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*est) {
      estimate.engines = expand_engines(estimate_engines);
      estimate.strict = !no_strict;
      return cmd_estimate(estimate, out, err);
    }
    if (*sim) {
      if (sim_theta.empty()) {
        sim_theta = default_synthetic_spec(1, 1, sim_unknown, 1).theta;
      }
      if (sim_sizes.empty()) {
        for (double pi : default_synthetic_spec(1, sim_known, 1, 1).known_sizes) {
          sim_sizes.push_back(pi / 1e6 * simulate.spec.total_population);
        }
      }
      simulate.spec.theta = sim_theta;
      simulate.spec.known_sizes = sim_sizes;
      return cmd_simulate(simulate, out, err);
    }
    if (*dia) return cmd_diagnose(diag, out, err);
    if (*ben) {
      bench.engines = expand_engines(bench_engines);
      if (!bench_out.empty()) bench.out_dir = bench_out;
      return cmd_benchmark(bench, out, err);
    }
  } catch (const std::exception& e) {
    report_error(err, "validation", e.what());
    return kExitInvalid;
  }
  return kExitInvalid;
}

} // namespace nsum::cli
