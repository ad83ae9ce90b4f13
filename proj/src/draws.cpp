#include "nsum/draws.hpp"

#include <charconv>

#include "nsum/errors.hpp"

namespace nsum {

std::string_view engine_name(Engine engine) noexcept {
  switch (engine) {
  case Engine::mh: return "mh";
  case Engine::gibbs: return "gibbs";
  case Engine::mc: return "mc";
  }
  return "unknown";
}

Engine parse_engine(std::string_view name) {
  if (name == "mh") return Engine::mh;
  if (name == "gibbs") return Engine::gibbs;
  if (name == "mc") return Engine::mc;
  throw ValidationError("unknown engine '" + std::string(name) + "' (expected mh, gibbs or mc)");
}

DrawMatrix::DrawMatrix(std::size_t chains, std::size_t iterations, std::size_t frequencies, std::size_t degrees,
                       DrawMetadata metadata)
    : chains_(chains), iterations_(iterations), frequencies_(frequencies), degrees_(degrees),
      values_(chains * iterations * (frequencies + degrees), 0.0), metadata_(std::move(metadata)) {}

std::vector<double> DrawMatrix::chain_trace(std::size_t chain, std::size_t parameter) const {
  std::vector<double> trace(iterations_);
  for (std::size_t t = 0; t < iterations_; ++t) trace[t] = at(chain, t, parameter);
  return trace;
}

std::vector<double> DrawMatrix::pooled(std::size_t parameter) const {
  std::vector<double> all;
  all.reserve(total_draws());
  for (std::size_t c = 0; c < chains_; ++c) {
    for (std::size_t t = 0; t < iterations_; ++t) all.push_back(at(c, t, parameter));
  }
  return all;
}

std::vector<std::vector<double>> DrawMatrix::traces(std::size_t parameter) const {
  std::vector<std::vector<double>> out;
  out.reserve(chains_);
  for (std::size_t c = 0; c < chains_; ++c) out.push_back(chain_trace(c, parameter));
  return out;
}

std::string DrawMatrix::parameter_name(std::size_t parameter) const {
  if (parameter < frequencies_) return "theta[" + std::to_string(parameter) + "]";
  return "delta[" + std::to_string(parameter - frequencies_) + "]";
}

std::optional<std::size_t> DrawMatrix::parameter_index(std::string_view name) const {
  auto parse = [&](std::string_view prefix) -> std::optional<std::size_t> {
    if (name.size() <= prefix.size() + 1 || name.substr(0, prefix.size()) != prefix || name.back() != ']') {
      return std::nullopt;
    }
    const auto digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    std::size_t index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    return index;
  };
  if (auto u = parse("theta["); u && *u < frequencies_) return *u;
  if (auto i = parse("delta["); i && *i < degrees_) return frequencies_ + *i;
  return std::nullopt;
}

} // namespace nsum
