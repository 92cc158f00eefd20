#include "rbood/inducer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rbood/error.hpp"

namespace rbood {

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    const auto& node = nodes_[static_cast<std::size_t>(n)];
    if (node.leaf()) {
      best = std::max(best, d);
    } else {
      stack.push_back({node.left, d + 1});
      stack.push_back({node.right, d + 1});
    }
  }
  return best;
}

std::size_t DecisionTree::leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf(); }));
}

const std::string& DecisionTree::predict(const FeatureTable& table, std::size_t row) const {
  int n = 0;
  while (!nodes_[static_cast<std::size_t>(n)].leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(n)];
    auto col = table.find(feature_names_[static_cast<std::size_t>(node.feature)]);
    if (!col) throw EvaluationError("missing feature '" + feature_names_[static_cast<std::size_t>(node.feature)] + "'");
    n = table.number(row, *col) <= node.threshold ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(n)].label;
}

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0;
  double sum = 0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

double midpoint(double a, double b) {
  double t = a + (b - a) / 2;
  return t < b ? t : a;
}

class Builder {
 public:
  Builder(const FeatureTable& data, const InducerConfig& config) : data_(data), config_(config) {
    std::map<std::string, std::size_t> ids;
    for (const auto& l : data.labels()) ids.emplace(l, 0);
    for (auto& [label, id] : ids) {
      id = class_names_.size();
      class_names_.push_back(label);
    }
    class_of_.reserve(data.rows());
    for (const auto& l : data.labels()) class_of_.push_back(ids.at(l));
    for (std::size_t c = 0; c < data.cols(); ++c)
      if (data.column(c).numeric) numeric_.push_back(c);
  }

  std::vector<DecisionTree::Node> build() {
    std::vector<std::size_t> rows(data_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return std::move(nodes_);
  }

  std::size_t classes() const { return class_names_.size(); }

 private:
  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::vector<std::size_t> counts(class_names_.size(), 0);
    for (auto r : rows) ++counts[class_of_[r]];
    const double parent = gini(counts, rows.size());

    struct Best {
      double impurity = std::numeric_limits<double>::infinity();
      std::size_t feature = 0;
      double threshold = 0;
    } best;
    bool found = false;

    if (depth < config_.max_depth && parent > 0 && rows.size() >= 2 * config_.min_leaf) {
      std::vector<std::size_t> order = rows;
      for (auto f : numeric_) {
        const auto& x = data_.column(f).numbers;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
        std::vector<std::size_t> left(class_names_.size(), 0);
        std::vector<std::size_t> right = counts;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          ++left[class_of_[order[i]]];
          --right[class_of_[order[i]]];
          const double a = x[order[i]], b = x[order[i + 1]];
          if (!(a < b)) continue;
          const std::size_t nl = i + 1, nr = order.size() - nl;
          if (nl < config_.min_leaf || nr < config_.min_leaf) continue;
          const double imp = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                             static_cast<double>(order.size());
          if (imp < best.impurity) {
            best = {imp, f, midpoint(a, b)};
            found = true;
          }
        }
      }
    }

    if (!found || !(best.impurity < parent)) {
      auto& leaf = nodes_[static_cast<std::size_t>(id)];
      std::size_t arg = 0;
      for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[arg]) arg = c;
      leaf.label = class_names_[arg];
      leaf.support = rows.size();
      return id;
    }

    const auto& x = data_.column(best.feature).numbers;
    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) (x[r] <= best.threshold ? lrows : rrows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(lrows, depth + 1);
    const int r = grow(rrows, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const FeatureTable& data_;
  const InducerConfig& config_;
  std::vector<std::string> class_names_;
  std::vector<std::size_t> class_of_;
  std::vector<std::size_t> numeric_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

double split_impurity(const FeatureTable& data, std::span<const std::size_t> rows, std::size_t feature,
                      double threshold) {
  std::map<std::string, std::size_t> left, right;
  std::size_t nl = 0, nr = 0;
  for (auto r : rows) {
    if (data.number(r, feature) <= threshold) {
      ++left[data.label(r)];
      ++nl;
    } else {
      ++right[data.label(r)];
      ++nr;
    }
  }
  auto g = [](const std::map<std::string, std::size_t>& m, std::size_t n) {
    if (n == 0) return 0.0;
    double s = 0;
    for (const auto& [_, c] : m) s += (static_cast<double>(c) / static_cast<double>(n)) * (static_cast<double>(c) / static_cast<double>(n));
    return 1.0 - s;
  };
  return (static_cast<double>(nl) * g(left, nl) + static_cast<double>(nr) * g(right, nr)) /
         static_cast<double>(rows.size());
}

DecisionTree induce_tree(const FeatureTable& data, const InducerConfig& config) {
  if (data.rows() == 0) throw DataError("cannot induce rules from an empty dataset");
  if (!data.has_labels()) throw ConfigError("rule induction needs a label column");
  if (config.max_depth < 1) throw ConfigError("max depth must be at least 1");
  if (config.min_leaf < 1) throw ConfigError("min leaf must be at least 1");
  Builder builder(data, config);
  if (builder.classes() < 2) throw DataError("rule induction needs at least two classes");
  auto nodes = builder.build();
  std::vector<std::string> names;
  for (std::size_t c = 0; c < data.cols(); ++c) names.push_back(data.column(c).name);
  if (nodes.size() == 1 && names.empty()) throw DataError("no features to build rules on");
  return DecisionTree(std::move(names), std::move(nodes));
}

Ruleset tree_to_rules(const DecisionTree& tree) {
  const auto& nodes = tree.nodes();
  std::vector<Rule> rules;
  if (nodes.front().leaf()) {
    Condition all;
    all.feature = tree.feature_names().front();
    all.op = Comparison::InInterval;
    all.interval = Interval{-INFINITY, INFINITY, true, true};
    rules.push_back(Rule{0, {all}, nodes.front().label});
    return Ruleset(std::move(rules));
  }
  std::vector<Condition> path;
  auto walk = [&](auto&& self, int n) -> void {
    const auto& node = nodes[static_cast<std::size_t>(n)];
    if (node.leaf()) {
      rules.push_back(Rule{0, path, node.label});
      return;
    }
    const auto& name = tree.feature_names()[static_cast<std::size_t>(node.feature)];
    path.push_back(Condition{name, Comparison::LessEqual, node.threshold, std::nullopt, std::nullopt});
    self(self, node.left);
    path.back().op = Comparison::Greater;
    self(self, node.right);
    path.pop_back();
  };
  walk(walk, 0);
  return Ruleset(std::move(rules));
}

std::vector<std::string> ruleset_warnings(const Ruleset& ruleset, const HitMatrix& training) {
  std::vector<std::string> out;
  if (ruleset.size() < 4)
    out.push_back("only " + std::to_string(ruleset.size()) +
                  " rules: hit histograms will be flat and detection weak; consider deeper rules");
  if (training.training.empty()) return out;
  for (std::size_t r = 0; r < ruleset.size(); ++r) {
    double mean = 0;
    for (const auto& h : training.training) mean += h.value(r);
    mean /= static_cast<double>(training.training.size());
    if (mean > 0.9)
      out.push_back("rule " + std::to_string(r + 1) + " is hit by " + std::to_string(mean * 100) +
                    "% of samples; near-universal rules carry little distribution information");
  }
  return out;
}

}  // namespace rbood
