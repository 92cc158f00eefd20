#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rbood/histogram.hpp"
#include "rbood/ruleset.hpp"
#include "rbood/table.hpp"

namespace rbood {

struct InducerConfig {
  std::size_t max_depth = 4;
  std::size_t min_leaf = 50;
};

/// Binary decision tree over numeric features. Node 0 is the root.
class DecisionTree {
 public:
  struct Node {
    // Internal nodes: feature >= 0, samples with value <= threshold go left.
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    // Leaves.
    std::string label;
    std::size_t support = 0;

    bool leaf() const noexcept { return feature < 0; }
  };

  DecisionTree(std::vector<std::string> feature_names, std::vector<Node> nodes)
      : feature_names_(std::move(feature_names)), nodes_(std::move(nodes)) {}

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  std::size_t depth() const;
  std::size_t leaves() const;

  /// Label of the leaf reached by `row` of `table` (columns looked up by name).
  const std::string& predict(const FeatureTable& table, std::size_t row) const;

 private:
  std::vector<std::string> feature_names_;
  std::vector<Node> nodes_;
};

/// Greedy Gini splits at midpoints between consecutive distinct values of each numeric
/// feature. A split must leave min_leaf samples on each side and strictly lower the
/// weighted impurity. Ties go to the lowest feature index, then the lowest threshold.
/// Leaves take the majority label (ties: lexicographically smallest).
DecisionTree induce_tree(const FeatureTable& data, const InducerConfig& config = {});

/// One rule per leaf, depth-first left to right. Left edges read `feature <= t`, right
/// edges `feature > t`. A single-leaf tree becomes one rule over the whole real line.
Ruleset tree_to_rules(const DecisionTree& tree);

/// Weighted Gini impurity of splitting `rows` on `feature <= threshold`.
double split_impurity(const FeatureTable& data, std::span<const std::size_t> rows, std::size_t feature,
                      double threshold);

/// Design warnings for a ruleset on training data: too few rules, or rules hit by
/// nearly every sample, both flatten the histograms.
std::vector<std::string> ruleset_warnings(const Ruleset& ruleset, const HitMatrix& training);

}  // namespace rbood
