#include "rbood/synthetic.hpp"

#include <memory>
#include <random>
#include <string>

#include "rbood/error.hpp"
#include "rbood/histogram.hpp"

namespace rbood {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

std::vector<std::string> feature_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

}  // namespace

FeatureTable generate_mixture(const MixtureSpec& spec, std::size_t rows, std::uint64_t seed) {
  if (spec.features == 0) throw ConfigError("mixture needs at least one feature");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution pick(spec.weight_c1);
  FeatureTable t(feature_names(spec.features));
  std::vector<double> row(spec.features);
  for (std::size_t i = 0; i < rows; ++i) {
    const bool c1 = pick(rng);
    for (std::size_t f = 0; f < spec.features; ++f) {
      row[f] = normal(rng) + (c1 ? spec.separation : 0.0) + (f < spec.shifted_features ? spec.shift : 0.0);
    }
    t.add_row(row, c1 ? "c1" : "c0");
  }
  return t;
}

FeatureTable generate_boxes(const BoxSpec& spec, std::size_t rows, std::uint64_t seed) {
  if (spec.features < 2) throw ConfigError("box generator needs at least two features");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> upper(0.5, 1.0);
  std::bernoulli_distribution moved(spec.shift);
  FeatureTable t(feature_names(spec.features));
  std::vector<double> row(spec.features);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& x : row) x = unit(rng);
    if (moved(rng)) row[0] = upper(rng);
    const int q = (row[0] > 0.5 ? 1 : 0) + (row[1] > 0.5 ? 2 : 0);
    t.add_row(row, "q" + std::to_string(q));
  }
  return t;
}

DataSource parse_generator(std::string_view text) {
  auto colon = text.find(':');
  std::string kind(text.substr(0, colon));
  std::vector<std::pair<std::string, double>> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      auto item = rest.substr(0, comma);
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ConfigError("generator parameter '" + std::string(item) + "' lacks '='");
      auto v = parse_real(item.substr(eq + 1));
      if (!v) throw ConfigError("generator parameter '" + std::string(item) + "' is not a number");
      params.emplace_back(std::string(item.substr(0, eq)), *v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  if (kind == "mixture") {
    MixtureSpec spec;
    for (const auto& [k, v] : params) {
      if (k == "features") spec.features = static_cast<std::size_t>(v);
      else if (k == "separation") spec.separation = v;
      else if (k == "weight") spec.weight_c1 = v;
      else if (k == "shift") spec.shift = v;
      else if (k == "shifted") spec.shifted_features = static_cast<std::size_t>(v);
      else throw ConfigError("unknown mixture parameter '" + k + "'");
    }
    return [spec](std::size_t rows, std::uint64_t seed) { return generate_mixture(spec, rows, seed); };
  }
  if (kind == "boxes") {
    BoxSpec spec;
    for (const auto& [k, v] : params) {
      if (k == "features") spec.features = static_cast<std::size_t>(v);
      else if (k == "shift") spec.shift = v;
      else throw ConfigError("unknown boxes parameter '" + k + "'");
    }
    return [spec](std::size_t rows, std::uint64_t seed) { return generate_boxes(spec, rows, seed); };
  }
  throw ConfigError("unknown generator '" + kind + "' (expected mixture or boxes)");
}

DataSource table_source(FeatureTable table) {
  auto shared = std::make_shared<const FeatureTable>(std::move(table));
  return [shared](std::size_t rows, std::uint64_t seed) {
    auto idx = split_indices(shared->rows(), rows, 1, seed);
    return shared->select(idx.front());
  };
}

}  // namespace rbood
