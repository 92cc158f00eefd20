#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "rbood/error.hpp"
#include "rbood/moments.hpp"
#include "rbood/streaming.hpp"
#include "test_util.hpp"

using namespace rbood;

namespace {

HitMask random_mask(std::mt19937_64& rng, std::size_t rules, double p = 0.3) {
  std::bernoulli_distribution b(p);
  HitMask m(rules);
  for (std::size_t j = 0; j < rules; ++j) m[j] = b(rng);
  return m;
}

std::vector<std::int64_t> recount(const std::vector<HitMask>& masks, std::size_t from, std::size_t to, std::size_t rules) {
  std::vector<std::int64_t> c(rules, 0);
  for (std::size_t i = from; i < to; ++i)
    for (std::size_t j = 0; j < rules; ++j) c[j] += masks[i][j];
  return c;
}

void expect_same_report(const DetectionReport& a, const DetectionReport& b) {
  ASSERT_EQ(a.per_metric.size(), b.per_metric.size());
  EXPECT_EQ(a.verdict, b.verdict);
  for (std::size_t i = 0; i < a.per_metric.size(); ++i) {
    EXPECT_EQ(a.per_metric[i].metric, b.per_metric[i].metric);
    EXPECT_EQ(a.per_metric[i].values, b.per_metric[i].values);
    EXPECT_EQ(a.per_metric[i].flag, b.per_metric[i].flag);
  }
}

struct Fixture {
  Ruleset rules;
  FeatureTable train;
  BaselineBundle bundle;
};

Fixture make_fixture(std::uint64_t seed, Mode mode, std::size_t n_s, std::size_t n_tr, std::size_t n_op) {
  std::mt19937_64 rng(seed);
  Fixture f{oracle::random_ruleset(rng, 6, 3), oracle::random_table(rng, n_s * n_tr, 3), {}};
  auto splits = make_splits(f.train, n_s, n_tr, seed);
  f.bundle.training = hit_matrix(f.rules, splits, {});
  BaselineConfig cfg;
  cfg.mode = mode;
  cfg.n_s = n_s;
  cfg.n_op = n_op;
  cfg.seed = seed;
  f.bundle.baselines = mode == Mode::Single ? wmi_baseline(f.bundle.training, cfg) : rbi_baseline(f.bundle.training, cfg);
  return f;
}

}  // namespace

TEST(SlidingWindow, MatchesRecountAtEveryStep) {
  std::mt19937_64 rng(1);
  for (std::size_t cap : {1u, 7u, 64u, 65u, 200u}) {
    const std::size_t rules = 1 + cap % 70;
    SlidingWindow w(cap, rules);
    std::vector<HitMask> masks;
    for (std::size_t i = 0; i < 3 * cap + 50; ++i) {
      masks.push_back(random_mask(rng, rules));
      auto h = w.push(masks.back());
      const std::size_t from = masks.size() > cap ? masks.size() - cap : 0;
      ASSERT_EQ(h.counts(), recount(masks, from, masks.size(), rules));
      ASSERT_EQ(h.split_size(), static_cast<std::int64_t>(masks.size() - from));
      ASSERT_EQ(w.mask(0), masks[from]);
      ASSERT_EQ(w.mask(w.fill() - 1), masks.back());
    }
    EXPECT_TRUE(w.full());
  }
}

TEST(SlidingWindow, EvictsOldestFirst) {
  SlidingWindow w(2, 2);
  w.push({true, false});
  w.push({false, true});
  EXPECT_EQ(w.counts(), (std::vector<std::int64_t>{1, 1}));
  w.push({false, true});
  EXPECT_EQ(w.counts(), (std::vector<std::int64_t>{0, 2}));
  EXPECT_EQ(w.histogram(), HitHistogram({0, 2}, 2));
  EXPECT_THROW(w.push({true}), DataError);
  EXPECT_THROW(SlidingWindow(0, 3), ConfigError);
}

TEST(SlidingWindow, WorkPerPushIndependentOfCapacity) {
  const std::size_t rules = 40, words = 1;
  std::mt19937_64 rng(2);
  std::vector<HitMask> masks;
  for (int i = 0; i < 30000; ++i) masks.push_back(random_mask(rng, rules, 0.5));
  std::vector<double> per_push;
  for (std::size_t cap : {10u, 1000u, 10000u}) {
    SlidingWindow w(cap, rules);
    std::uint64_t before = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (i == cap) before = w.work();
      const auto pre = w.work();
      w.push(masks[i]);
      ASSERT_LE(w.work() - pre, 2 * (words + rules));
    }
    per_push.push_back(static_cast<double>(w.work() - before) / static_cast<double>(masks.size() - cap));
  }
  EXPECT_NEAR(per_push[0], per_push[2], 0.05 * per_push[0]);
}

TEST(WindowPush, RecordAndBoundAgree) {
  std::mt19937_64 rng(3);
  auto rs = oracle::random_ruleset(rng, 5, 3);
  auto t = oracle::random_table(rng, 300, 3);
  BoundRuleset bound(rs, t);
  SlidingWindow a(50, rs.size()), b(50, rs.size());
  for (std::size_t r = 0; r < t.rows(); ++r) EXPECT_EQ(window_push(a, t.record(r), rs), window_push(b, bound, r));
  Record missing{{"zzz", 1.0}};
  const auto before = a.counts();
  EXPECT_THROW(window_push(a, missing, rs), EvaluationError);
  EXPECT_EQ(a.counts(), before);
}

TEST(StreamDetector, SingleModeEqualsBatchDetection) {
  const std::size_t n_s = 60;
  auto f = make_fixture(4, Mode::Single, n_s, 12, 1);
  std::mt19937_64 rng(40);
  auto stream = oracle::random_table(rng, 8 * n_s, 3);
  BoundRuleset bound(f.rules, stream);
  StreamDetector det(f.rules, f.bundle);
  EXPECT_TRUE(det.warnings().empty());
  std::size_t ticks = 0;
  for (std::size_t r = 0; r < stream.rows(); ++r) {
    auto rec = det.push(bound, r);
    ASSERT_EQ(rec.has_value(), r + 1 >= n_s);
    if (!rec) continue;
    ++ticks;
    std::vector<std::size_t> rows(n_s);
    std::iota(rows.begin(), rows.end(), r + 1 - n_s);
    auto batch = detect_single(f.bundle.training, hit_histogram(bound, rows, Origin::Operational), f.bundle.baselines);
    EXPECT_EQ(rec->sample_index, r);
    expect_same_report(rec->report, batch);
  }
  EXPECT_EQ(ticks, stream.rows() - n_s + 1);
}

TEST(StreamDetector, StrideSkipsTicks) {
  auto f = make_fixture(5, Mode::Single, 20, 6, 1);
  StreamConfig cfg;
  cfg.stride = 7;
  StreamDetector det(f.rules, f.bundle, cfg);
  std::mt19937_64 rng(50);
  std::vector<std::size_t> at;
  for (std::size_t i = 0; i < 100; ++i)
    if (auto rec = det.push_mask(random_mask(rng, f.rules.size()))) at.push_back(rec->sample_index);
  ASSERT_FALSE(at.empty());
  EXPECT_EQ(at.front(), 19u);
  for (std::size_t i = 1; i < at.size(); ++i) EXPECT_EQ(at[i] - at[i - 1], 7u);
  cfg.stride = 0;
  EXPECT_THROW(StreamDetector(f.rules, f.bundle, cfg), ConfigError);
}

TEST(StreamDetector, GroupModeUsesSpacedSnapshots) {
  const std::size_t n_s = 30, n_op = 3;
  auto f = make_fixture(6, Mode::Group, n_s, 10, n_op);
  StreamDetector det(f.rules, f.bundle);
  EXPECT_EQ(det.snapshot_stride(), n_s / n_op);
  std::mt19937_64 rng(60);
  std::vector<HitMask> masks;
  const std::size_t stride = det.snapshot_stride();
  for (std::size_t i = 0; i < 6 * n_s; ++i) {
    masks.push_back(random_mask(rng, f.rules.size()));
    auto rec = det.push_mask(masks.back());
    const std::size_t first = n_s - 1 + (n_op - 1) * stride;
    ASSERT_EQ(rec.has_value(), i >= first) << i;
    if (!rec) continue;
    std::vector<HitHistogram> group;
    for (std::size_t q = 0; q < n_op; ++q) {
      const std::size_t end = i + 1 - (n_op - 1 - q) * stride;
      group.emplace_back(recount(masks, end - n_s, end, f.rules.size()), n_s);
    }
    expect_same_report(rec->report, detect_group(f.bundle.training, group, f.bundle.baselines));
  }
}

TEST(StreamDetector, WindowMismatchWarnsAndWrongRulesetFails) {
  auto f = make_fixture(7, Mode::Single, 40, 6, 1);
  StreamConfig cfg;
  cfg.window = 50;
  StreamDetector det(f.rules, f.bundle, cfg);
  ASSERT_EQ(det.warnings().size(), 1u);
  EXPECT_NE(det.warnings()[0].find("40"), std::string::npos);
  auto other = parse_ruleset("if x1 < 0.5 then a\nif x1 >= 0.5 then b\n");
  EXPECT_THROW(StreamDetector(other, f.bundle), FingerprintMismatch);
}

TEST(StreamDetector, TickCsv) {
  auto f = make_fixture(8, Mode::Single, 10, 5, 1);
  StreamDetector det(f.rules, f.bundle);
  std::mt19937_64 rng(80);
  std::optional<TickRecord> rec;
  for (int i = 0; i < 10; ++i) rec = det.push_mask(random_mask(rng, f.rules.size()));
  ASSERT_TRUE(rec);
  std::ostringstream out;
  write_tick_header(out);
  write_tick_rows(out, *rec);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample_index,metric,value,base_min,base_max,flag,verdict");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind("9,", 0), 0u);
  }
  EXPECT_EQ(rows, 3);
}

TEST(Moments, SmallExample) {
  MomentAccumulator acc;
  for (double x : {1.0, 2.0, 3.0, 4.0}) acc.push(x);
  EXPECT_DOUBLE_EQ(acc.mean(), 2.5);
  EXPECT_DOUBLE_EQ(acc.variance(), 1.25);
  EXPECT_NEAR(acc.skewness(), 0.0, 1e-15);
  EXPECT_NEAR(acc.kurtosis(), 1.64, 1e-12);
}

TEST(Moments, ConstantStream) {
  MomentAccumulator acc(16);
  for (int i = 0; i < 100; ++i) acc.push(1e6 + 0.1);
  auto m = acc.query();
  EXPECT_NEAR(m.mean, 1e6 + 0.1, 1e-9);
  EXPECT_EQ(m.variance, 0.0);
  EXPECT_EQ(m.skewness, 0.0);
  EXPECT_EQ(m.kurtosis, 0.0);
}

TEST(Moments, SlidingAgainstTwoPassOracle) {
  std::mt19937_64 rng(9);
  std::lognormal_distribution<double> d(3.0, 0.7);
  const std::size_t cap = 97;
  MomentAccumulator acc(cap);
  std::deque<double> window;
  for (int i = 0; i < 20000; ++i) {
    const double x = d(rng);
    acc.push(x);
    window.push_back(x);
    if (window.size() > cap) window.pop_front();
    if (window.size() < 4) continue;
    auto got = acc.query();
    auto want = batch_moments(window.begin(), window.end());
    ASSERT_NEAR(got.mean, want.mean, 1e-12 * std::abs(want.mean));
    ASSERT_NEAR(got.variance, want.variance, 1e-9 * want.variance);
    ASSERT_NEAR(got.skewness, want.skewness, 1e-9 * std::max(1.0, std::abs(want.skewness)));
    ASSERT_NEAR(got.kurtosis, want.kurtosis, 1e-9 * want.kurtosis);
  }
}

TEST(Moments, ExplicitEvictionAndCountErrors) {
  MomentAccumulator acc;
  EXPECT_THROW(acc.mean(), DataError);
  acc.push(1);
  acc.push(2);
  EXPECT_THROW(acc.skewness(), DataError);
  acc.push(3);
  EXPECT_NO_THROW(acc.skewness());
  EXPECT_THROW(acc.kurtosis(), DataError);
  acc.evict();
  EXPECT_DOUBLE_EQ(acc.mean(), 2.5);
  acc.clear();
  EXPECT_EQ(acc.count(), 0u);
  EXPECT_THROW(acc.evict(), DataError);
}
