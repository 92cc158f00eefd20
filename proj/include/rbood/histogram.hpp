#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rbood/ruleset.hpp"
#include "rbood/table.hpp"

namespace rbood {

enum class Origin { Training, Operational };

std::string_view to_string(Origin o);

/// A group of n_s samples treated as one observation unit.
struct Split {
  FeatureTable samples;
  Origin origin = Origin::Training;
  std::size_t index = 0;

  std::size_t size() const noexcept { return samples.rows(); }
};

/// Per-rule hit counts of one split. Values are counts / n_s, so every value is an
/// exact multiple of 1/n_s in [0, 1]; equality between values is decided on counts.
class HitHistogram {
 public:
  HitHistogram() = default;
  HitHistogram(std::vector<std::int64_t> counts, std::int64_t split_size, Origin origin = Origin::Training);

  /// Rounds each value * split_size to the nearest count; throws if any value is not
  /// within 1e-9 of a multiple of 1/split_size or lies outside [0, 1].
  static HitHistogram from_values(std::span<const double> values, std::int64_t split_size,
                                  Origin origin = Origin::Training);

  std::size_t size() const noexcept { return counts_.size(); }
  std::int64_t split_size() const noexcept { return split_size_; }
  Origin origin() const noexcept { return origin_; }
  std::int64_t count(std::size_t rule) const { return counts_[rule]; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  double value(std::size_t rule) const { return static_cast<double>(counts_[rule]) / static_cast<double>(split_size_); }
  std::vector<double> values() const;

  friend bool operator==(const HitHistogram& a, const HitHistogram& b) {
    return a.split_size_ == b.split_size_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t split_size_ = 1;
  Origin origin_ = Origin::Training;
};

/// N_r x (N_tr + N_op) table of histograms sharing one ruleset.
struct HitMatrix {
  std::vector<HitHistogram> training;
  std::vector<HitHistogram> operational;
  std::uint64_t ruleset_digest = 0;

  std::size_t rules() const noexcept;
  std::size_t columns() const noexcept { return training.size() + operational.size(); }
};

/// Seeded shuffle of all row indices, then n_splits consecutive chunks of n_s rows.
std::vector<Split> make_splits(const FeatureTable& dataset, std::size_t n_s, std::size_t n_splits, std::uint64_t seed,
                               Origin origin = Origin::Training);

/// Row indices of the splits make_splits would draw.
std::vector<std::vector<std::size_t>> split_indices(std::size_t rows, std::size_t n_s, std::size_t n_splits,
                                                    std::uint64_t seed);

HitHistogram hit_histogram(const Ruleset& ruleset, const Split& split);
HitHistogram hit_histogram(const Ruleset& ruleset, const FeatureTable& samples, Origin origin = Origin::Training);
/// Histogram over the given rows of a table.
HitHistogram hit_histogram(const BoundRuleset& bound, std::span<const std::size_t> rows, Origin origin);

HitMatrix hit_matrix(const Ruleset& ruleset, std::span<const Split> training, std::span<const Split> operational);

}  // namespace rbood
