#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbood/table.hpp"

namespace rbood {

enum class Comparison { Less, LessEqual, Greater, GreaterEqual, Equal, InInterval };

struct Interval {
  double lo = 0;
  double hi = 0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double x) const noexcept {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// One atomic test on a feature. `category` is set only for string equality on a
/// categorical column (`colour == "red"`); `interval` only for InInterval.
struct Condition {
  std::string feature;
  Comparison op = Comparison::LessEqual;
  double threshold = 0;
  std::optional<std::string> category;
  std::optional<Interval> interval;

  bool holds(double x) const noexcept;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Rule {
  std::size_t id = 0;                // 1-based, equals position in the ruleset
  std::vector<Condition> premise;    // conjunction, never empty
  std::string consequence;

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Ordered, immutable collection of rules. Rule order fixes the row order of every
/// hit histogram computed from it.
class Ruleset {
 public:
  Ruleset() = default;
  /// Validates premises and renumbers ids 1..N in the given order.
  explicit Ruleset(std::vector<Rule> rules);

  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }
  const Rule& operator[](std::size_t i) const { return rules_[i]; }
  const Rule& at(std::size_t i) const { return rules_.at(i); }
  auto begin() const noexcept { return rules_.begin(); }
  auto end() const noexcept { return rules_.end(); }
  const std::vector<Rule>& rules() const noexcept { return rules_; }

  /// Features referenced by any rule, in order of first appearance.
  const std::vector<std::string>& feature_names() const noexcept { return features_; }

  /// 64-bit FNV-1a digest of the canonical text form.
  std::uint64_t digest() const;

  friend bool operator==(const Ruleset& a, const Ruleset& b) { return a.rules_ == b.rules_; }

 private:
  std::vector<Rule> rules_;
  std::vector<std::string> features_;
};

/// Per-rule premise satisfaction for one sample.
using HitMask = std::vector<bool>;

Ruleset parse_ruleset(std::string_view text);
Ruleset read_ruleset_file(const std::string& path);
std::string format_ruleset(const Ruleset& ruleset);
std::string format_rule(const Rule& rule);

/// True iff every condition of the premise holds. The consequence is not consulted.
bool evaluate_premise(const Rule& rule, const Record& sample);
HitMask ruleset_hits(const Ruleset& ruleset, const Record& sample);

/// A ruleset resolved against the columns of one table, for evaluating many rows fast.
class BoundRuleset {
 public:
  /// Throws EvaluationError if a feature is missing from the table or is used
  /// numerically on a categorical column.
  BoundRuleset(const Ruleset& ruleset, const FeatureTable& table);

  std::size_t size() const noexcept { return rules_.size(); }
  bool hits(std::size_t rule, std::size_t row) const;
  /// Resizes `mask` to N_r and fills it for `row`.
  void hits(std::size_t row, HitMask& mask) const;

 private:
  struct BoundCondition {
    const Condition* condition;
    const FeatureTable::Column* column;
  };
  std::vector<std::vector<BoundCondition>> rules_;
};

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed = 14695981039346656037ull);

}  // namespace rbood
