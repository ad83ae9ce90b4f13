#include "nsum/draws_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsum/errors.hpp"
#include "nsum/summary.hpp"
#include "nsum/survey_io.hpp"

namespace nsum {

using json = nlohmann::json;

namespace {

constexpr const char* kMetaPrefix = "# meta ";

json meta_json(const DrawMatrix& draws) {
  const auto& m = draws.metadata();
  return json{{"engine", std::string(engine_name(m.engine))},
              {"seed", m.seed},
              {"config_hash", m.config_hash},
              {"iterations", m.iterations},
              {"burn_in", m.burn_in},
              {"thin", m.thin},
              {"seconds", m.seconds},
              {"warnings", m.warnings},
              {"acceptance_rates", m.acceptance_rates},
              {"chains", draws.chains()},
              {"stored_iterations", draws.iterations()},
              {"frequencies", draws.frequencies()},
              {"degrees", draws.degrees()}};
}

DrawMetadata meta_from_json(const json& j) {
  DrawMetadata m;
  m.engine = parse_engine(j.at("engine").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_hash = j.value("config_hash", std::string());
  m.iterations = j.value("iterations", std::size_t{0});
  m.burn_in = j.value("burn_in", std::size_t{0});
  m.thin = j.value("thin", std::size_t{1});
  m.seconds = j.value("seconds", 0.0);
  if (j.contains("warnings")) m.warnings = j["warnings"].get<std::map<std::string, std::uint64_t>>();
  if (j.contains("acceptance_rates")) m.acceptance_rates = j["acceptance_rates"].get<std::vector<double>>();
  return m;
}

struct Record {
  std::size_t chain;
  std::size_t iteration;
  std::string parameter;
  double value;
};

struct ParsedName {
  bool is_theta;
  std::size_t index;
};

ParsedName parse_parameter(const std::string& name) {
  auto parse = [&](const std::string& prefix) -> std::optional<std::size_t> {
    if (name.rfind(prefix, 0) != 0 || name.back() != ']') return std::nullopt;
    std::size_t index = 0;
    const char* begin = name.data() + prefix.size();
    const char* end = name.data() + name.size() - 1;
    auto [ptr, ec] = std::from_chars(begin, end, index);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return index;
  };
  if (auto u = parse("theta[")) return {true, *u};
  if (auto i = parse("delta[")) return {false, *i};
  throw ValidationError("unrecognised parameter name '" + name + "'");
}

DrawMatrix assemble(const std::vector<Record>& records, std::optional<DrawMetadata> meta) {
  if (records.empty()) throw ValidationError("draw file contains no records");
  std::size_t chains = 0, iterations = 0, frequencies = 0, degrees = 0;
  std::vector<ParsedName> names;
  names.reserve(records.size());
  for (const auto& r : records) {
    chains = std::max(chains, r.chain + 1);
    iterations = std::max(iterations, r.iteration + 1);
    const auto p = parse_parameter(r.parameter);
    (p.is_theta ? frequencies : degrees) = std::max(p.is_theta ? frequencies : degrees, p.index + 1);
    names.push_back(p);
  }
  DrawMatrix draws(chains, iterations, frequencies, degrees, meta.value_or(DrawMetadata{}));
  if (records.size() != draws.values().size()) {
    throw ValidationError("draw file is incomplete: expected " + std::to_string(draws.values().size()) +
                          " records, found " + std::to_string(records.size()));
  }
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const std::size_t p = names[k].is_theta ? draws.theta_index(names[k].index) : draws.delta_index(names[k].index);
    draws.at(r.chain, r.iteration, p) = r.value;
  }
  return draws;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("draw file line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

} // namespace

void write_draws(std::ostream& out, const DrawMatrix& draws, DrawFormat format) {
  std::string buffer;
  buffer.reserve(1 << 20);
  auto flush = [&] {
    out << buffer;
    buffer.clear();
  };
  if (format == DrawFormat::csv) {
    buffer += kMetaPrefix + meta_json(draws).dump() + "\n";
    buffer += "chain,iteration,parameter,value\n";
  } else {
    buffer += json{{"meta", meta_json(draws)}}.dump() + "\n";
  }
  std::vector<std::string> names(draws.parameters());
  for (std::size_t p = 0; p < names.size(); ++p) names[p] = draws.parameter_name(p);
  for (std::size_t c = 0; c < draws.chains(); ++c) {
    for (std::size_t t = 0; t < draws.iterations(); ++t) {
      for (std::size_t p = 0; p < draws.parameters(); ++p) {
        const std::string value = format_double(draws.at(c, t, p));
        if (format == DrawFormat::csv) {
          buffer += std::to_string(c) + ',' + std::to_string(t) + ',' + names[p] + ',' + value + '\n';
        } else {
          buffer += "{\"chain\":" + std::to_string(c) + ",\"iteration\":" + std::to_string(t) + ",\"parameter\":\"" +
                    names[p] + "\",\"value\":" + value + "}\n";
        }
        if (buffer.size() > (1 << 20)) flush();
      }
    }
  }
  flush();
}

void export_draws(const DrawMatrix& draws, const std::filesystem::path& path, DrawFormat format) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_draws(out, draws, format);
  if (!out) throw ValidationError("failed writing " + path.string());
}

DrawMatrix read_draws(std::istream& in, DrawFormat format) {
  std::vector<Record> records;
  std::optional<DrawMetadata> meta;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (format == DrawFormat::csv) {
      if (line.rfind(kMetaPrefix, 0) == 0) {
        try {
          meta = meta_from_json(json::parse(line.substr(std::string(kMetaPrefix).size())));
        } catch (const json::exception& e) {
          throw ValidationError("draw file line " + std::to_string(line_no) + ": bad metadata: " + e.what());
        }
        continue;
      }
      if (line[0] == '#') continue;
      if (!header_seen) {
        if (split_csv_line(line) != std::vector<std::string>{"chain", "iteration", "parameter", "value"}) {
          throw ValidationError("draw CSV header must be chain,iteration,parameter,value");
        }
        header_seen = true;
        continue;
      }
      const auto f = split_csv_line(line);
      if (f.size() != 4) throw ValidationError("draw file line " + std::to_string(line_no) + ": expected 4 fields");
      records.push_back({parse_number<std::size_t>(f[0], line_no), parse_number<std::size_t>(f[1], line_no), f[2],
                         parse_number<double>(f[3], line_no)});
    } else {
      json j;
      try {
        j = json::parse(line);
        if (j.contains("meta")) {
          meta = meta_from_json(j["meta"]);
          continue;
        }
        records.push_back({j.at("chain").get<std::size_t>(), j.at("iteration").get<std::size_t>(),
                           j.at("parameter").get<std::string>(), j.at("value").get<double>()});
      } catch (const json::exception& e) {
        throw ValidationError("draw file line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return assemble(records, meta);
}

DrawMatrix import_draws(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open draw file " + path.string());
  return read_draws(in, path.extension() == ".jsonl" ? DrawFormat::jsonl : DrawFormat::csv);
}

void write_plotdata(std::ostream& out, const DrawMatrix& draws, const SurveyData& data) {
  if (draws.frequencies() != data.unknown_count()) throw ValidationError("draws do not match the survey");
  const auto& m = draws.metadata();
  out << "# engine=" << engine_name(m.engine) << " seed=" << m.seed << " config_hash=" << m.config_hash << '\n';
  out << "population,draw_or_quantile_kind,value\n";
  const double N = data.total_population();
  for (std::size_t u = 0; u < draws.frequencies(); ++u) {
    const std::string& label = data.labels().unknown[u];
    auto theta = draws.pooled(draws.theta_index(u));
    for (double v : theta) out << label << ",draw," << format_double(N * v) << '\n';
    // Quantiles are taken on the frequencies and then scaled, so each is exactly N times a frequency quantile.
    std::sort(theta.begin(), theta.end());
    for (int q = 1; q <= 99; ++q) {
      char kind[8];
      std::snprintf(kind, sizeof kind, "q%02d", q);
      out << label << ',' << kind << ',' << format_double(N * quantile_sorted(theta, q / 100.0)) << '\n';
    }
  }
}

void export_plotdata(const DrawMatrix& draws, const SurveyData& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_plotdata(out, draws, data);
  if (!out) throw ValidationError("failed writing " + path.string());
}

} // namespace nsum
