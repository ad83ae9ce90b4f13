#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsum/commands.hpp"
#include "nsum/draws_io.hpp"
#include "nsum/random.hpp"

using namespace nsum;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "nsum");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "nsum_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json without_timing(json j) {
  if (j.contains("meta")) j["meta"].erase("seconds");
  return j;
}

// Synthetic survey shared by the tests below: n = 120, K = 8, U = 2.
const fs::path& survey_dir() {
  static const fs::path dir = [] {
    auto d = fresh_dir("survey");
    const auto r = invoke({"simulate", "--respondents", "120", "--known", "8", "--theta", "0.004,0.009", "--seed", "5",
                           "--out-dir", d.string()});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> data_args() {
  return {"--data", (survey_dir() / "survey.csv").string(), "--schema", (survey_dir() / "schema.json").string()};
}

void write_two_chain_draws(const fs::path& path, std::size_t length, double separation) {
  DrawMatrix draws(2, length, 1, 1);
  draws.metadata().engine = Engine::gibbs;
  RandomStream rng(3, 0, 0);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < length; ++t) {
      draws.at(c, t, 0) = 0.01 + 0.001 * rng.normal() + separation * c;
      draws.at(c, t, 1) = 200.0 + rng.normal();
    }
  export_draws(draws, path, DrawFormat::csv);
}

} // namespace

TEST_CASE("simulate writes survey, schema and truth") {
  const auto& d = survey_dir();
  CHECK(fs::exists(d / "survey.csv"));
  CHECK(fs::exists(d / "schema.json"));
  const auto truth = json::parse(slurp(d / "truth.json"));
  CHECK(truth["theta"].size() == 2);
  CHECK(truth["seed"] == 5);
  CHECK(truth["delta"].size() == 120);

  auto zero = fresh_dir("zero");
  REQUIRE(invoke({"simulate", "--respondents", "30", "--theta", "0", "--out-dir", zero.string()}).code == 0);
  const auto text = slurp(zero / "survey.csv");
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) CHECK(line.substr(line.rfind(',', line.rfind(',') - 1)) == ",0,1");
}

TEST_CASE("missing or invalid inputs exit nonzero with a structured message") {
  auto r = invoke({"estimate", "--data", (survey_dir() / "survey.csv").string()});
  CHECK(r.code == cli::kExitInvalid);
  r = invoke({"estimate", "--data", (survey_dir() / "survey.csv").string(), "--schema", "/nonexistent/schema.json"});
  CHECK(r.code == cli::kExitInvalid);
  r = invoke({});
  CHECK(r.code == cli::kExitInvalid);

  auto d = fresh_dir("bad");
  std::ofstream(d / "bad.csv") << "known1,unknown1\n1,-3\n";
  std::ofstream(d / "schema.json") << R"({"known":[{"column":"known1","size":100}],"unknown":["unknown1"],"total_population":10000})";
  r = invoke({"estimate", "--data", (d / "bad.csv").string(), "--schema", (d / "schema.json").string(), "--out-dir",
              d.string()});
  CHECK(r.code == cli::kExitInvalid);
  const auto message = json::parse(r.err.substr(r.err.find('{')));
  CHECK(message["error"] == "validation");
  CHECK(message["message"].get<std::string>().find("unknown1") != std::string::npos);
}

TEST_CASE("monte carlo estimate with 4000 draws is fast and recovers truth") {
  auto out = fresh_dir("mc");
  auto args = std::vector<std::string>{"estimate"};
  for (const auto& a : data_args()) args.push_back(a);
  for (std::string a : {"--engine", "mc", "--chains", "1", "--iters", "4000", "--burnin", "0", "--thin", "1",
                        "--out-dir"})
    args.push_back(a);
  args.push_back(out.string());
  const auto start = std::chrono::steady_clock::now();
  const auto r = invoke(args);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 10.0);
  CHECK(r.code != cli::kExitInvalid);
  const auto summary = json::parse(slurp(out / "summary_mc.json"));
  CHECK(summary["draws"] == 4000);
  const auto truth = json::parse(slurp(survey_dir() / "truth.json"));
  for (std::size_t u = 0; u < 2; ++u) {
    const auto& f = summary["populations"][u]["frequency"];
    const double t = truth["theta"][u];
    CHECK(f["lower"].get<double>() < t);
    CHECK(f["upper"].get<double>() > t);
  }
  for (const char* file : {"draws_mc.csv", "diagnostics_mc.json", "plotdata_mc.csv"}) CHECK(fs::exists(out / file));
}

TEST_CASE("engine=all writes a comparison table and reruns reproduce") {
  auto run_once = [&](const fs::path& out) {
    auto args = std::vector<std::string>{"estimate"};
    for (const auto& a : data_args()) args.push_back(a);
    for (std::string a : {"--engine", "all", "--chains", "2", "--iters", "3000", "--burnin", "500", "--thin", "5",
                          "--seed", "99", "--no-strict", "--out-dir"})
      args.push_back(a);
    args.push_back(out.string());
    return invoke(args);
  };
  const auto a = fresh_dir("all_a"), b = fresh_dir("all_b");
  REQUIRE(run_once(a).code == cli::kExitOk);
  REQUIRE(run_once(b).code == cli::kExitOk);

  const auto table = json::parse(slurp(a / "comparison.json"));
  CHECK(table["pairs"].size() == 6);
  for (const auto& row : table["pairs"]) CHECK(row["within_tolerance"] == true);

  for (const char* engine : {"mh", "gibbs", "mc"}) {
    const std::string e = engine;
    CHECK(without_timing(json::parse(slurp(a / ("summary_" + e + ".json")))) ==
          without_timing(json::parse(slurp(b / ("summary_" + e + ".json")))));
    const auto da = slurp(a / ("draws_" + e + ".csv")), db = slurp(b / ("draws_" + e + ".csv"));
    CHECK(da.substr(da.find('\n')) == db.substr(db.find('\n')));
    CHECK(slurp(a / ("plotdata_" + e + ".csv")) == slurp(b / ("plotdata_" + e + ".csv")));
    const auto meta = json::parse(slurp(a / ("summary_" + e + ".json")))["meta"];
    CHECK(meta["seed"] == 99);
    CHECK(meta["engine"] == e);
    CHECK(meta["config_hash"].get<std::string>().size() == 16);
  }
}

TEST_CASE("environment variables override defaults") {
  ::setenv("NSUM_SEED", "4242", 1);
  auto out = fresh_dir("env");
  auto args = std::vector<std::string>{"estimate"};
  for (const auto& a : data_args()) args.push_back(a);
  for (std::string a : {"--engine", "mc", "--chains", "1", "--iters", "200", "--burnin", "0", "--thin", "1",
                        "--no-strict", "--out-dir"})
    args.push_back(a);
  args.push_back(out.string());
  const auto r = invoke(args);
  ::unsetenv("NSUM_SEED");
  REQUIRE(r.code == cli::kExitOk);
  CHECK(json::parse(slurp(out / "summary_mc.json"))["meta"]["seed"] == 4242);
}

TEST_CASE("diagnose reports by chain count and draw length") {
  auto d = fresh_dir("diagnose");
  write_two_chain_draws(d / "two.csv", 5000, 0.0);
  auto r = invoke({"diagnose", (d / "two.csv").string(), "--out", (d / "two.json").string()});
  CHECK(r.code == cli::kExitOk);
  const auto two = json::parse(slurp(d / "two.json"));
  CHECK(two["rhat_available"] == true);
  for (const auto& p : two["parameters"]) CHECK(p["rhat"].is_number());

  DrawMatrix single(1, 300, 1, 1);
  RandomStream rng(4, 0, 0);
  for (std::size_t t = 0; t < 300; ++t) {
    single.at(0, t, 0) = rng.uniform();
    single.at(0, t, 1) = 100 + rng.normal();
  }
  export_draws(single, d / "one.csv", DrawFormat::csv);
  r = invoke({"diagnose", (d / "one.csv").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("R-hat unavailable") != std::string::npos);
  CHECK(r.out.find("insufficient draws, need 3746") != std::string::npos);
  const auto one = json::parse(slurp(d / "one.diagnostics.json"));
  CHECK(one["rhat_available"] == false);
  CHECK(one["parameters"][0]["rhat"]["status"] == "unavailable");
  CHECK(one["parameters"][0]["geweke"][0].is_number());
  CHECK(one["parameters"][0]["raftery_lewis"][0]["status"] == "insufficient_draws");
  CHECK(one["parameters"][0]["raftery_lewis"][0]["n_min"] == 3746);

  write_two_chain_draws(d / "split.csv", 1000, 0.01);
  CHECK(invoke({"diagnose", (d / "split.csv").string()}).code == cli::kExitOk);
  CHECK(invoke({"diagnose", (d / "split.csv").string(), "--strict"}).code == cli::kExitDiagnostics);
}

TEST_CASE("benchmark smoke run") {
  auto out = fresh_dir("bench");
  auto args = std::vector<std::string>{"benchmark"};
  for (const auto& a : data_args()) args.push_back(a);
  for (std::string a : {"--draws", "100", "--out-dir"}) args.push_back(a);
  args.push_back(out.string());
  const auto start = std::chrono::steady_clock::now();
  const auto r = invoke(args);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0);
  REQUIRE(r.code == cli::kExitOk);
  std::istringstream csv(slurp(out / "benchmark.csv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line))
    if (!line.empty() && line[0] != '#' && line.rfind("engine", 0) != 0) ++rows;
  CHECK(rows == 3);

  args = {"benchmark"};
  for (const auto& a : data_args()) args.push_back(a);
  for (std::string a : {"--draws", "100", "--engine", "mc,gibbs"}) args.push_back(a);
  const auto two = invoke(args);
  REQUIRE(two.code == cli::kExitOk);
  std::size_t lines = 0;
  std::istringstream table(two.out);
  while (std::getline(table, line)) ++lines;
  CHECK(lines == 3);  // header plus one row per engine
}

TEST_CASE("benchmark layout gives every engine the same draw budget") {
  RunConfig base;
  const auto mc = cli::benchmark_config(Engine::mc, 80000, base);
  CHECK(mc.chains == 1);
  CHECK(mc.stored_per_chain() == 80000);
  const auto gibbs = cli::benchmark_config(Engine::gibbs, 80000, base);
  CHECK(gibbs.iterations == 80000);
  CHECK(gibbs.burn_in == 10000);
  CHECK(gibbs.thin == 70);
  const auto tiny = cli::benchmark_config(Engine::mh, 100, base);
  CHECK(tiny.stored_per_chain() >= 1);
  CHECK_NOTHROW(tiny.validate());
}
