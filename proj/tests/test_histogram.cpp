#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "rbood/error.hpp"
#include "rbood/histogram.hpp"
#include "test_util.hpp"

using namespace rbood;

namespace {

FeatureTable counting_table(std::size_t n) {
  FeatureTable t({"i"});
  for (std::size_t r = 0; r < n; ++r) {
    double v = static_cast<double>(r);
    t.add_row(std::span<const double>(&v, 1));
  }
  return t;
}

}  // namespace

TEST(MakeSplits, ExactDisjointPartition) {
  auto t = counting_table(10);
  auto splits = make_splits(t, 5, 2, 7);
  ASSERT_EQ(splits.size(), 2u);
  std::set<double> seen;
  for (const auto& s : splits) {
    EXPECT_EQ(s.size(), 5u);
    for (std::size_t r = 0; r < s.size(); ++r) seen.insert(s.samples.number(r, 0));
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(MakeSplits, InsufficientDataReportsCounts) {
  auto t = counting_table(10);
  try {
    make_splits(t, 5, 3, 7);
    FAIL();
  } catch (const DataError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("15"), std::string::npos);
    EXPECT_NE(msg.find("10"), std::string::npos);
  }
}

TEST(MakeSplits, DeterministicForSeed) {
  auto t = counting_table(100);
  auto a = make_splits(t, 10, 5, 42);
  auto b = make_splits(t, 10, 5, 42);
  auto c = make_splits(t, 10, 5, 43);
  bool differs = false;
  for (std::size_t s = 0; s < 5; ++s) {
    EXPECT_EQ(a[s].samples.column(0).numbers, b[s].samples.column(0).numbers);
    differs = differs || a[s].samples.column(0).numbers != c[s].samples.column(0).numbers;
  }
  EXPECT_TRUE(differs);
}

TEST(HitHistogram, ScaledCounts) {
  auto rs = parse_ruleset("if x < 3 then a\nif x > 100 then b\n");
  FeatureTable t({"x"});
  for (double v : {0.0, 1.0, 2.0, 5.0}) t.add_row(std::span<const double>(&v, 1));
  auto h = hit_histogram(rs, t);
  EXPECT_EQ(h.value(0), 0.75);
  EXPECT_EQ(h.value(1), 0.0);
  EXPECT_EQ(h.split_size(), 4);
}

TEST(HitHistogram, MatchesNaiveRecount) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto rs = oracle::random_ruleset(rng, 8, 3);
    auto t = oracle::random_table(rng, 64, 3);
    auto h = hit_histogram(rs, t);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      std::int64_t count = 0;
      for (std::size_t r = 0; r < t.rows(); ++r) {
        bool all = true;
        for (const auto& c : rs[i].premise) all = all && oracle::oracle_holds(c, t.number(r, *t.find(c.feature)));
        count += all;
      }
      EXPECT_EQ(h.count(i), count);
      EXPECT_GE(h.value(i), 0.0);
      EXPECT_LE(h.value(i), 1.0);
    }
  }
}

TEST(HitHistogram, PermutationInvariantAndMultiHitTotals) {
  std::mt19937_64 rng(19);
  auto rs = oracle::random_ruleset(rng, 10, 3);
  auto t = oracle::random_table(rng, 80, 3);
  std::vector<std::size_t> order(t.rows());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  auto h = hit_histogram(rs, t);
  EXPECT_EQ(hit_histogram(rs, t.select(order)), h);
  auto total = std::accumulate(h.counts().begin(), h.counts().end(), std::int64_t{0});
  EXPECT_LE(total, static_cast<std::int64_t>(rs.size() * t.rows()));
}

TEST(HitHistogram, ConcatenationIsMeanOfHalves) {
  std::mt19937_64 rng(23);
  auto rs = oracle::random_ruleset(rng, 6, 2);
  auto t = oracle::random_table(rng, 60, 2);
  std::vector<std::size_t> first(30), second(30), all(60);
  std::iota(first.begin(), first.end(), 0u);
  std::iota(second.begin(), second.end(), 30u);
  std::iota(all.begin(), all.end(), 0u);
  auto a = hit_histogram(rs, t.select(first));
  auto b = hit_histogram(rs, t.select(second));
  auto ab = hit_histogram(rs, t.select(all));
  for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_EQ(ab.count(i) * 2, (a.count(i) + b.count(i)) * 2);
  for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_DOUBLE_EQ(ab.value(i), 0.5 * (a.value(i) + b.value(i)));
}

TEST(HitHistogram, FromValuesRejectsOffGrid) {
  std::vector<double> ok{0.166, 0.182};
  EXPECT_EQ(HitHistogram::from_values(ok, 1000).count(0), 166);
  std::vector<double> bad{0.1665};
  EXPECT_THROW(HitHistogram::from_values(bad, 1000), DataError);
  std::vector<double> out{1.5};
  EXPECT_THROW(HitHistogram::from_values(out, 1000), DataError);
}

TEST(HitMatrix, ShapesForTrainingAndOperationalColumns) {
  std::mt19937_64 rng(29);
  auto rs = oracle::random_ruleset(rng, 5, 2);
  auto t = oracle::random_table(rng, 61 * 20, 2);
  auto splits = make_splits(t, 20, 61, 1);
  std::span<const Split> all(splits);

  auto table1 = hit_matrix(rs, all.first(50), {});
  EXPECT_EQ(table1.training.size(), 50u);
  EXPECT_EQ(table1.operational.size(), 0u);
  EXPECT_EQ(table1.rules(), 5u);

  auto table2 = hit_matrix(rs, all.first(50), all.subspan(50, 1));
  EXPECT_EQ(table2.columns(), 51u);
  EXPECT_EQ(table2.operational.front().origin(), Origin::Operational);
  EXPECT_EQ(table2.operational.front(), hit_histogram(rs, splits[50]));

  auto table3 = hit_matrix(rs, all.first(50), all.subspan(50, 10));
  EXPECT_EQ(table3.operational.size(), 10u);
  EXPECT_EQ(table3.training[7], hit_histogram(rs, splits[7]));
  EXPECT_EQ(table3.ruleset_digest, rs.digest());

  EXPECT_THROW(hit_matrix(rs, {}, {}), DataError);
}

TEST(Table, CsvRoundTripAndLabelColumn) {
  std::istringstream in("a,b,label\n1,2.5,x\n3,-4,y\n");
  auto t = read_csv(in, std::string("label"));
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 2u);
  EXPECT_EQ(t.label(1), "y");
  std::ostringstream out;
  write_csv(out, t);
  std::istringstream back(out.str());
  auto t2 = read_csv(back, std::string("label"));
  EXPECT_EQ(t2.column(1).numbers, t.column(1).numbers);
  std::istringstream missing("a,b\n1,\n");
  EXPECT_THROW(read_csv(missing), DataError);
  std::istringstream nolabel("a,b\n1,2\n");
  EXPECT_THROW(read_csv(nolabel, std::string("label")), ConfigError);
}
