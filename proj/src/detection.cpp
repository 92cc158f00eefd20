#include "rbood/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rbood/error.hpp"

namespace rbood {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::WMI: return "wmi";
    case Metric::RBI: return "rbi";
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
  }
  return "?";
}

std::string_view to_string(Mode m) { return m == Mode::Single ? "single" : "group"; }

std::string_view to_string(Verdict v) { return v == Verdict::InDistribution ? "in-distribution" : "ood"; }

Metric metric_from_string(std::string_view s) {
  if (s == "wmi") return Metric::WMI;
  if (s == "rbi") return Metric::RBI;
  if (s == "l1") return Metric::L1;
  if (s == "l2") return Metric::L2;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

Mode mode_from_string(std::string_view s) {
  if (s == "single") return Mode::Single;
  if (s == "group") return Mode::Group;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected single or group)");
}

std::vector<Metric> default_roster(Mode mode) {
  if (mode == Mode::Single) return {Metric::WMI, Metric::L1, Metric::L2};
  return {Metric::RBI, Metric::L1, Metric::L2};
}

double ClosedInterval::normalized_distance(double x) const noexcept {
  if (contains(x)) return 0.0;
  const double width = std::max(max - min, std::numeric_limits<double>::epsilon());
  const double gap = x < min ? min - x : x - max;
  return gap / width;
}

ClosedInterval envelope(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot build an interval from no values");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

std::string config_fingerprint(const BaselineConfig& config) {
  char buf[512];
  std::string roster;
  for (auto m : config.effective_roster()) {
    roster += to_string(m);
    roster += ',';
  }
  std::snprintf(buf, sizeof buf,
                "mode=%s;ns=%zu;ntr=%zu;nop=%zu;seed=%llu;sigma_floor=%.17g;p_min=%.17g;roster=%s;rules=%016llx;"
                "conventions=value-frequency,natural-log,strict-majority,closed-intervals,population-sd",
                std::string(to_string(config.mode)).c_str(), config.n_s, config.n_tr, config.n_op,
                static_cast<unsigned long long>(config.seed), config.sigma_floor, kProbabilityFloor, roster.c_str(),
                static_cast<unsigned long long>(config.ruleset_digest));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(buf)));
  return hex;
}

std::optional<ClosedInterval> Baselines::interval(Metric m) const {
  switch (m) {
    case Metric::WMI: return wmi;
    case Metric::RBI: return rbi;
    case Metric::L1: return l1;
    case Metric::L2: return l2;
  }
  return std::nullopt;
}

const MetricResult* DetectionReport::find(Metric m) const {
  for (const auto& r : per_metric)
    if (r.metric == m) return &r;
  return nullptr;
}

bool majority(const std::vector<bool>& flags) {
  if (flags.empty()) throw DataError("majority of an empty set of flags");
  auto on = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  return 2 * on > flags.size();
}

namespace {

void check_matrix(const HitMatrix& training, std::size_t min_columns) {
  if (training.training.size() < min_columns)
    throw DataError("need at least " + std::to_string(min_columns) + " training splits, got " +
                    std::to_string(training.training.size()));
  const auto nr = training.rules();
  for (const auto& h : training.training)
    if (h.size() != nr) throw DataError("training histograms have different lengths");
}

struct PairEnvelopes {
  ClosedInterval wmi, l1, l2;
};

PairEnvelopes pair_envelopes(std::span<const HitHistogram> cols, bool with_wmi) {
  std::vector<double> wmi, l1, l2;
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      if (with_wmi) wmi.push_back(weighted_mutual_information(cols[i], cols[j]));
      l1.push_back(lp_norm(cols[i], cols[j], 1));
      l2.push_back(lp_norm(cols[i], cols[j], 2));
    }
  PairEnvelopes e;
  if (with_wmi) e.wmi = envelope(wmi);
  e.l1 = envelope(l1);
  e.l2 = envelope(l2);
  return e;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MetricResult vote(Metric m, std::vector<double> values, const ClosedInterval& baseline) {
  MetricResult r;
  r.metric = m;
  r.baseline = baseline;
  std::vector<bool> outside(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) outside[i] = !baseline.contains(values[i]);
  r.votes_out = static_cast<std::size_t>(std::count(outside.begin(), outside.end(), true));
  r.votes_total = values.size();
  r.flag = majority(outside);
  r.normalized_distance = baseline.normalized_distance(median(values));
  r.values = std::move(values);
  return r;
}

void finish(DetectionReport& report) {
  report.verdict = std::any_of(report.per_metric.begin(), report.per_metric.end(),
                               [](const MetricResult& r) { return r.flag; })
                       ? Verdict::OutOfDistribution
                       : Verdict::InDistribution;
}

}  // namespace

void check_compatible(const Baselines& base, const HitMatrix& training) {
  if (base.fingerprint != config_fingerprint(base.config))
    throw FingerprintMismatch("baseline fingerprint does not match its recorded configuration");
  if (base.config.ruleset_digest != training.ruleset_digest)
    throw FingerprintMismatch("baseline was built with a different ruleset");
}

Baselines wmi_baseline(const HitMatrix& training, BaselineConfig config) {
  check_matrix(training, 2);
  config.mode = Mode::Single;
  config.n_tr = training.training.size();
  config.ruleset_digest = training.ruleset_digest;
  auto env = pair_envelopes(training.training, true);
  Baselines b;
  b.config = config;
  b.wmi = env.wmi;
  b.l1 = env.l1;
  b.l2 = env.l2;
  b.fingerprint = config_fingerprint(b.config);
  return b;
}

DetectionReport detect_single(const HitMatrix& training, const HitHistogram& op, const Baselines& base) {
  check_compatible(base, training);
  check_matrix(training, 1);
  if (base.config.mode != Mode::Single) throw ConfigError("baseline was built for group mode");
  if (op.size() != training.rules()) throw DataError("operational histogram length differs from training");

  DetectionReport report;
  report.mode = Mode::Single;
  for (auto m : base.config.effective_roster()) {
    auto interval = base.interval(m);
    if (!interval) throw ConfigError("metric '" + std::string(to_string(m)) + "' is not available in single mode");
    std::vector<double> values;
    values.reserve(training.training.size());
    for (const auto& tr : training.training) {
      switch (m) {
        case Metric::WMI: values.push_back(weighted_mutual_information(tr, op)); break;
        case Metric::L1: values.push_back(lp_norm(tr, op, 1)); break;
        case Metric::L2: values.push_back(lp_norm(tr, op, 2)); break;
        case Metric::RBI: break;
      }
    }
    report.per_metric.push_back(vote(m, std::move(values), *interval));
  }
  finish(report);
  return report;
}

double group_rbi(std::span<const HitHistogram> tr1, std::span<const HitHistogram> group, double sigma_floor) {
  auto ref = fit_bank(tr1, BankSource::TR1, sigma_floor);
  auto own = fit_bank(group, BankSource::OP, sigma_floor);
  return rbi(group, own, ref);
}

ClosedInterval rbi_envelope(std::span<const HitHistogram> tr1, std::span<const HitHistogram> tr2, double sigma_floor) {
  if (tr1.size() < 2) throw DataError("TR1 needs at least 2 splits");
  if (tr2.size() < 3) throw DataError("TR2 needs at least 3 splits so every fold keeps 2");
  auto ref = fit_bank(tr1, BankSource::TR1, sigma_floor);
  std::vector<double> values;
  values.reserve(tr2.size());
  std::vector<HitHistogram> fold;
  for (std::size_t m = 0; m < tr2.size(); ++m) {
    fold.clear();
    for (std::size_t i = 0; i < tr2.size(); ++i)
      if (i != m) fold.push_back(tr2[i]);
    auto own = fit_bank(fold, BankSource::TR2, sigma_floor);
    values.push_back(rbi(fold, own, ref));
  }
  return envelope(values);
}

Baselines rbi_baseline(const HitMatrix& training, BaselineConfig config) {
  config.mode = Mode::Group;
  config.n_tr = training.training.size();
  config.ruleset_digest = training.ruleset_digest;
  if (config.n_op < 2) throw ConfigError("group mode needs N_op >= 2");
  if (config.n_tr < config.n_op + 3) throw ConfigError("group mode needs k = N_tr - N_op - 1 >= 2");
  check_matrix(training, config.n_tr);
  const std::span<const HitHistogram> all(training.training);
  const auto k = config.k();
  const auto roster = config.effective_roster();
  const bool with_wmi = std::find(roster.begin(), roster.end(), Metric::WMI) != roster.end();
  auto env = pair_envelopes(all, with_wmi);
  Baselines b;
  b.config = config;
  if (with_wmi) b.wmi = env.wmi;
  b.rbi = rbi_envelope(all.first(k), all.subspan(k), config.sigma_floor);
  b.l1 = env.l1;
  b.l2 = env.l2;
  b.fingerprint = config_fingerprint(b.config);
  return b;
}

DetectionReport detect_group(const HitMatrix& training, std::span<const HitHistogram> op_group, const Baselines& base) {
  check_compatible(base, training);
  if (base.config.mode != Mode::Group) throw ConfigError("baseline was built for single-split mode");
  if (op_group.size() < 2) throw DataError("group detection needs at least 2 operational splits");
  check_matrix(training, base.config.k() + 1);
  for (const auto& h : op_group)
    if (h.size() != training.rules()) throw DataError("operational histogram length differs from training");

  const std::span<const HitHistogram> tr1 = std::span<const HitHistogram>(training.training).first(base.config.k());
  DetectionReport report;
  report.mode = Mode::Group;
  for (auto m : base.config.effective_roster()) {
    auto interval = base.interval(m);
    if (!interval) throw ConfigError("metric '" + std::string(to_string(m)) + "' is not available in group mode");
    std::vector<double> values;
    if (m == Metric::RBI) {
      values.push_back(group_rbi(tr1, op_group, base.config.sigma_floor));
    } else if (m == Metric::L1 || m == Metric::L2) {
      const int p = m == Metric::L1 ? 1 : 2;
      values.reserve(training.training.size() * op_group.size());
      for (const auto& tr : training.training)
        for (const auto& op : op_group) values.push_back(lp_norm(tr, op, p));
    } else {
      for (const auto& tr : training.training)
        for (const auto& op : op_group) values.push_back(weighted_mutual_information(tr, op));
    }
    report.per_metric.push_back(vote(m, std::move(values), *interval));
  }
  finish(report);
  return report;
}

}  // namespace rbood
