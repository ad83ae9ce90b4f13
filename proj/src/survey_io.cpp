#include "nsum/survey_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "nsum/errors.hpp"

namespace nsum {

using json = nlohmann::json;

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

SurveySchema parse_schema(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("schema must be a JSON object");
  SurveySchema schema;
  try {
    for (const auto& entry : doc.at("known")) {
      schema.known.push_back({entry.at("column").get<std::string>(), entry.at("size").get<double>()});
    }
    for (const auto& column : doc.at("unknown")) schema.unknown.push_back(column.get<std::string>());
    if (doc.contains("weight") && !doc["weight"].is_null()) schema.weight = doc["weight"].get<std::string>();
    if (doc.contains("id") && !doc["id"].is_null()) schema.id = doc["id"].get<std::string>();
    schema.total_population = doc.at("total_population").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("schema: ") + e.what());
  }
  if (schema.known.empty()) throw ValidationError("schema lists no known populations");
  if (schema.unknown.empty()) throw ValidationError("schema lists no unknown populations");
  return schema;
}

SurveySchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open schema file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schema(buffer.str());
}

std::string schema_to_json(const SurveySchema& schema) {
  json doc;
  doc["known"] = json::array();
  for (const auto& k : schema.known) doc["known"].push_back({{"column", k.column}, {"size", k.size}});
  doc["unknown"] = schema.unknown;
  if (schema.weight) doc["weight"] = *schema.weight;
  if (schema.id) doc["id"] = *schema.id;
  doc["total_population"] = schema.total_population;
  return doc.dump(2);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  for (auto& f : fields) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
  }
  return fields;
}

namespace {

std::int64_t parse_count(const std::string& text, std::size_t row, const std::string& column) {
  if (text.empty() || text == "NA" || text == "na" || text == "NaN") {
    throw CellError(row, column, "missing count");
  }
  std::int64_t value = 0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec == std::errc{} && ptr != end && *ptr == '.') {
    // Accept integer-valued decimals such as "3.0".
    const char* p = ptr + 1;
    while (p != end && *p == '0') ++p;
    if (p == end && ptr + 1 != end) ptr = end;
  }
  if (ec != std::errc{} || ptr != end) {
    double probe = 0.0;
    auto [dptr, dec] = std::from_chars(begin, end, probe);
    if (dec == std::errc{} && dptr == end) {
      throw CellError(row, column, probe < 0 ? "negative count '" + text + "'" : "non-integer count '" + text + "'");
    }
    throw CellError(row, column, "not a number: '" + text + "'");
  }
  if (value < 0) throw CellError(row, column, "negative count '" + text + "'");
  return value;
}

double parse_weight(const std::string& text, std::size_t row, const std::string& column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw CellError(row, column, "weight is not a number: '" + text + "'");
  }
  if (!(value > 0.0)) throw CellError(row, column, "weight must be positive");
  return value;
}

} // namespace

SurveyData read_survey_csv(std::istream& in, const SurveySchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("survey CSV is empty");
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t c = 0; c < header.size(); ++c) position.emplace(header[c], c);
  auto locate = [&](const std::string& column) {
    auto it = position.find(column);
    if (it == position.end()) throw ValidationError("schema column '" + column + "' is not in the CSV header");
    return it->second;
  };

  std::vector<std::size_t> known_cols, unknown_cols;
  for (const auto& k : schema.known) known_cols.push_back(locate(k.column));
  for (const auto& u : schema.unknown) unknown_cols.push_back(locate(u));
  const std::optional<std::size_t> weight_col = schema.weight ? std::optional(locate(*schema.weight)) : std::nullopt;
  const std::optional<std::size_t> id_col = schema.id ? std::optional(locate(*schema.id)) : std::nullopt;

  std::vector<std::int64_t> known_values, unknown_values;
  std::vector<double> weights;
  SurveyData::Labels labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw CellError(row, "*", "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < known_cols.size(); ++k) {
      known_values.push_back(parse_count(fields[known_cols[k]], row, schema.known[k].column));
    }
    for (std::size_t u = 0; u < unknown_cols.size(); ++u) {
      unknown_values.push_back(parse_count(fields[unknown_cols[u]], row, schema.unknown[u]));
    }
    if (weight_col) weights.push_back(parse_weight(fields[*weight_col], row, *schema.weight));
    if (id_col) labels.respondents.push_back(fields[*id_col]);
  }
  if (row == 0) throw ValidationError("survey CSV has no respondent rows");

  std::vector<double> sizes;
  for (const auto& k : schema.known) {
    sizes.push_back(k.size);
    labels.known.push_back(k.column);
  }
  labels.unknown = schema.unknown;
  return SurveyData(CountMatrix(row, known_cols.size(), std::move(known_values)),
                    CountMatrix(row, unknown_cols.size(), std::move(unknown_values)), std::move(sizes),
                    schema.total_population, std::move(weights), std::move(labels));
}

SurveyData load_survey_csv(const std::filesystem::path& path, const SurveySchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open survey file " + path.string());
  return read_survey_csv(in, schema);
}

SurveySchema schema_for(const SurveyData& data) {
  SurveySchema schema;
  for (std::size_t k = 0; k < data.known_count(); ++k) {
    schema.known.push_back({data.labels().known[k], data.known_sizes()[k]});
  }
  schema.unknown = data.labels().unknown;
  schema.weight = "weight";
  if (!data.labels().respondents.empty()) schema.id = "id";
  schema.total_population = data.total_population();
  return schema;
}

void write_survey_csv(std::ostream& out, const SurveyData& data) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  const bool with_id = !data.labels().respondents.empty();
  if (with_id) out << "id,";
  for (const auto& label : data.labels().known) out << quote(label) << ',';
  for (const auto& label : data.labels().unknown) out << quote(label) << ',';
  out << "weight\n";
  for (std::size_t i = 0; i < data.respondents(); ++i) {
    if (with_id) out << quote(data.labels().respondents[i]) << ',';
    for (auto x : data.known().row(i)) out << x << ',';
    for (auto y : data.unknown().row(i)) out << y << ',';
    out << format_double(data.weights()[i]) << '\n';
  }
}

void export_survey(const SurveyData& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& schema_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw ValidationError("cannot write " + csv_path.string());
  write_survey_csv(csv, data);
  std::ofstream schema(schema_path);
  if (!schema) throw ValidationError("cannot write " + schema_path.string());
  schema << schema_to_json(schema_for(data)) << '\n';
}

} // namespace nsum
