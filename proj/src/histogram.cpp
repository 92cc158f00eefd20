#include "rbood/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rbood/error.hpp"

namespace rbood {

std::string_view to_string(Origin o) { return o == Origin::Training ? "training" : "operational"; }

HitHistogram::HitHistogram(std::vector<std::int64_t> counts, std::int64_t split_size, Origin origin)
    : counts_(std::move(counts)), split_size_(split_size), origin_(origin) {
  if (split_size_ < 1) throw DataError("split size must be at least 1");
  for (auto c : counts_)
    if (c < 0 || c > split_size_) throw DataError("hit count outside [0, split size]");
}

HitHistogram HitHistogram::from_values(std::span<const double> values, std::int64_t split_size, Origin origin) {
  std::vector<std::int64_t> counts;
  counts.reserve(values.size());
  for (double v : values) {
    double scaled = v * static_cast<double>(split_size);
    double rounded = std::round(scaled);
    if (!(v >= 0.0 && v <= 1.0) || std::abs(scaled - rounded) > 1e-9 * std::max(1.0, scaled))
      throw DataError("histogram value is not a multiple of 1/n_s in [0, 1]");
    counts.push_back(static_cast<std::int64_t>(rounded));
  }
  return HitHistogram(std::move(counts), split_size, origin);
}

std::vector<double> HitHistogram::values() const {
  std::vector<double> out(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = value(i);
  return out;
}

std::size_t HitMatrix::rules() const noexcept {
  if (!training.empty()) return training.front().size();
  if (!operational.empty()) return operational.front().size();
  return 0;
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t rows, std::size_t n_s, std::size_t n_splits,
                                                    std::uint64_t seed) {
  if (n_s == 0 || n_splits == 0) throw ConfigError("split size and split count must be positive");
  if (rows < n_s * n_splits)
    throw DataError("insufficient data: " + std::to_string(n_splits) + " splits of " + std::to_string(n_s) +
                    " rows require " + std::to_string(n_s * n_splits) + " rows, " + std::to_string(rows) +
                    " available");
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(n_splits);
  for (std::size_t s = 0; s < n_splits; ++s)
    out[s].assign(order.begin() + static_cast<std::ptrdiff_t>(s * n_s),
                  order.begin() + static_cast<std::ptrdiff_t>((s + 1) * n_s));
  return out;
}

std::vector<Split> make_splits(const FeatureTable& dataset, std::size_t n_s, std::size_t n_splits, std::uint64_t seed,
                               Origin origin) {
  auto idx = split_indices(dataset.rows(), n_s, n_splits, seed);
  std::vector<Split> out;
  out.reserve(n_splits);
  for (std::size_t s = 0; s < n_splits; ++s) out.push_back(Split{dataset.select(idx[s]), origin, s});
  return out;
}

HitHistogram hit_histogram(const BoundRuleset& bound, std::span<const std::size_t> rows, Origin origin) {
  if (rows.empty()) throw DataError("a split needs at least one sample");
  std::vector<std::int64_t> counts(bound.size(), 0);
  for (auto row : rows)
    for (std::size_t r = 0; r < bound.size(); ++r)
      if (bound.hits(r, row)) ++counts[r];
  return HitHistogram(std::move(counts), static_cast<std::int64_t>(rows.size()), origin);
}

HitHistogram hit_histogram(const Ruleset& ruleset, const FeatureTable& samples, Origin origin) {
  BoundRuleset bound(ruleset, samples);
  std::vector<std::size_t> rows(samples.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return hit_histogram(bound, rows, origin);
}

HitHistogram hit_histogram(const Ruleset& ruleset, const Split& split) {
  return hit_histogram(ruleset, split.samples, split.origin);
}

HitMatrix hit_matrix(const Ruleset& ruleset, std::span<const Split> training, std::span<const Split> operational) {
  if (training.empty()) throw DataError("hit matrix needs at least one training split");
  HitMatrix m;
  m.ruleset_digest = ruleset.digest();
  for (const auto& s : training) m.training.push_back(hit_histogram(ruleset, s.samples, Origin::Training));
  for (const auto& s : operational) m.operational.push_back(hit_histogram(ruleset, s.samples, Origin::Operational));
  return m;
}

}  // namespace rbood
