#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "rbood/error.hpp"
#include "rbood/eval.hpp"
#include "rbood/inducer.hpp"
#include "rbood/synthetic.hpp"
#include "test_util.hpp"

using namespace rbood;

namespace {

double gini(const std::map<std::string, std::size_t>& counts, std::size_t n) {
  double g = 1;
  for (const auto& [k, c] : counts) g -= (double(c) / double(n)) * (double(c) / double(n));
  return g;
}

struct Best {
  int feature = -1;
  double threshold = 0;
  double impurity = 0;
};

// Every midpoint of every feature, scored from scratch.
Best exhaustive_root(const FeatureTable& t, std::size_t min_leaf) {
  const std::size_t n = t.rows();
  std::map<std::string, std::size_t> all;
  for (std::size_t r = 0; r < n; ++r) ++all[t.label(r)];
  Best best;
  best.impurity = gini(all, n);
  for (std::size_t f = 0; f < t.cols(); ++f) {
    std::set<double> distinct;
    for (std::size_t r = 0; r < n; ++r) distinct.insert(t.number(r, f));
    std::vector<double> v(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double thr = v[i] + (v[i + 1] - v[i]) / 2;
      std::map<std::string, std::size_t> l, r;
      std::size_t nl = 0, nr = 0;
      for (std::size_t row = 0; row < n; ++row)
        if (t.number(row, f) <= thr) ++l[t.label(row)], ++nl;
        else ++r[t.label(row)], ++nr;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double imp = (double(nl) * gini(l, nl) + double(nr) * gini(r, nr)) / double(n);
      if (imp < best.impurity - 1e-12) best = {int(f), thr, imp};
    }
  }
  return best;
}

FeatureTable labeled(std::mt19937_64& rng, std::size_t rows, std::size_t cols, std::size_t grid) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  FeatureTable t(names);
  std::uniform_int_distribution<std::size_t> g(0, grid);
  std::bernoulli_distribution noise(0.2);
  std::vector<double> row(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& x : row) x = double(g(rng)) / double(grid);
    bool y = row[0] + 0.5 * row[cols - 1] > 0.7;
    if (noise(rng)) y = !y;
    t.add_row(row, y ? "yes" : "no");
  }
  return t;
}

}  // namespace

TEST(InduceTree, OneDimensionalSplitNearZero) {
  FeatureTable t({"x"});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const double x = n(rng);
    t.add_row(std::vector<double>{x}, x < 0 ? "neg" : "pos");
  }
  auto tree = induce_tree(t, {1, 10});
  ASSERT_EQ(tree.leaves(), 2u);
  EXPECT_NEAR(tree.nodes()[0].threshold, 0.0, 0.01);
  auto rules = tree_to_rules(tree);
  EXPECT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules[0].consequence, "neg");
  EXPECT_EQ(rules[1].consequence, "pos");
}

TEST(InduceTree, ConstantFeaturesGiveSingleLeaf) {
  FeatureTable t({"a", "b"});
  for (int i = 0; i < 200; ++i) t.add_row(std::vector<double>{1.0, 2.0}, i % 3 ? "u" : "v");
  auto tree = induce_tree(t);
  EXPECT_EQ(tree.leaves(), 1u);
  EXPECT_EQ(tree.nodes()[0].label, "u");
  auto rules = tree_to_rules(tree);
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(format_rule(rules[0]), "if a in [-inf, inf] then u");
  for (std::size_t r = 0; r < t.rows(); ++r) EXPECT_TRUE(evaluate_premise(rules[0], t.record(r)));
}

TEST(InduceTree, RootMatchesExhaustiveSearch) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = labeled(rng, 150 + trial * 10, 1 + trial % 4, 5 + trial % 20);
    const std::size_t min_leaf = 1 + trial % 25;
    auto tree = induce_tree(t, {1, min_leaf});
    auto best = exhaustive_root(t, min_leaf);
    const auto& root = tree.nodes()[0];
    ASSERT_EQ(root.feature, best.feature) << trial;
    if (best.feature < 0) continue;
    EXPECT_EQ(root.threshold, best.threshold);
    std::vector<std::size_t> rows(t.rows());
    std::iota(rows.begin(), rows.end(), 0u);
    EXPECT_NEAR(split_impurity(t, rows, std::size_t(best.feature), best.threshold), best.impurity, 1e-12);
  }
}

TEST(InduceTree, RulesPartitionInputAndMatchPredictions) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = labeled(rng, 1000, 3, 50);
    auto tree = induce_tree(t, {4, 20});
    EXPECT_LE(tree.depth(), 4u);
    auto rules = tree_to_rules(tree);
    EXPECT_EQ(rules.size(), tree.leaves());
    for (const auto& n : tree.nodes())
      if (n.leaf()) EXPECT_GE(n.support, 20u);
    auto probe = oracle::random_table(rng, 500, 3);
    FeatureTable renamed({"f0", "f1", "f2"});
    for (std::size_t r = 0; r < probe.rows(); ++r)
      renamed.add_row(std::vector<double>{probe.number(r, 0), probe.number(r, 1), probe.number(r, 2)});
    for (std::size_t r = 0; r < renamed.rows(); ++r) {
      auto mask = ruleset_hits(rules, renamed.record(r));
      ASSERT_EQ(std::count(mask.begin(), mask.end(), true), 1);
      const auto j = std::size_t(std::find(mask.begin(), mask.end(), true) - mask.begin());
      EXPECT_EQ(rules[j].consequence, tree.predict(renamed, r));
    }
  }
}

TEST(InduceTree, Deterministic) {
  std::mt19937_64 rng(4);
  auto t = labeled(rng, 800, 3, 30);
  EXPECT_EQ(format_ruleset(tree_to_rules(induce_tree(t))), format_ruleset(tree_to_rules(induce_tree(t))));
}

TEST(InduceTree, Errors) {
  FeatureTable unlabeled({"a"});
  unlabeled.add_row(std::vector<double>{1.0});
  EXPECT_THROW(induce_tree(unlabeled), ConfigError);
  FeatureTable empty({"a"});
  EXPECT_THROW(induce_tree(empty), DataError);
  FeatureTable one({"a"});
  for (int i = 0; i < 10; ++i) one.add_row(std::vector<double>{double(i)}, "only");
  EXPECT_THROW(induce_tree(one), DataError);
}

TEST(RulesetWarnings, FewAndBroadRules) {
  auto rs = parse_ruleset("if a in [-inf, inf] then x\n");
  HitMatrix m;
  m.training = {HitHistogram({10}, 10), HitHistogram({10}, 10)};
  EXPECT_EQ(ruleset_warnings(rs, m).size(), 2u);
}

TEST(Synthetic, GeneratorsAreSeededAndShifted) {
  MixtureSpec s;
  auto a = generate_mixture(s, 500, 9), b = generate_mixture(s, 500, 9);
  ASSERT_EQ(a.rows(), 500u);
  EXPECT_EQ(a.cols(), 6u);
  for (std::size_t r = 0; r < a.rows(); ++r) EXPECT_EQ(a.number(r, 2), b.number(r, 2));
  s.shift = 3;
  auto c = generate_mixture(s, 20000, 9);
  double m0 = 0, m5 = 0;
  for (std::size_t r = 0; r < c.rows(); ++r) m0 += c.number(r, 0), m5 += c.number(r, 5);
  EXPECT_NEAR(m0 / 20000, 3 + 0.75, 0.05);
  EXPECT_NEAR(m5 / 20000, 0.75, 0.05);
  auto gen = parse_generator("mixture:shift=2.5,features=4");
  EXPECT_EQ(gen(10, 1).cols(), 4u);
  EXPECT_EQ(parse_generator("boxes")(10, 1).cols(), 4u);
  EXPECT_THROW(parse_generator("nope"), ConfigError);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
}

TEST(Evaluate, SmallRunSeparatesShiftedSource) {
  auto in = parse_generator("boxes");
  auto out = parse_generator("boxes:shift=0.8");
  EvalConfig cfg;
  cfg.n_s = 200;
  cfg.n_tr = 10;
  cfg.repetitions = 8;
  cfg.threads = 2;
  cfg.inducer = {3, 20};
  auto s = evaluate(in, out, cfg);
  EXPECT_EQ(s.repetitions, 8u);
  EXPECT_EQ(s.false_negatives, 0u);
  auto again = evaluate(in, out, cfg);
  EXPECT_EQ(s.false_positives, again.false_positives);
  EXPECT_EQ(s.flag_rate_in, again.flag_rate_in);
  cfg.threads = 1;
  EXPECT_EQ(evaluate(in, out, cfg).flag_rate_out, s.flag_rate_out);
}
