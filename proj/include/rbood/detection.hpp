#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbood/histogram.hpp"
#include "rbood/metrics.hpp"

namespace rbood {

enum class Metric { WMI, RBI, L1, L2 };
enum class Mode { Single, Group };
enum class Verdict { InDistribution, OutOfDistribution };

std::string_view to_string(Metric m);
std::string_view to_string(Mode m);
std::string_view to_string(Verdict v);
Metric metric_from_string(std::string_view s);
Mode mode_from_string(std::string_view s);

/// Default metric roster for a mode: {WMI, L1, L2} or {RBI, L1, L2}.
std::vector<Metric> default_roster(Mode mode);

/// Closed interval [min, max]; boundary values count as inside.
struct ClosedInterval {
  double min = 0;
  double max = 0;

  bool contains(double x) const noexcept { return x >= min && x <= max; }
  /// 0 inside; otherwise the gap to the nearest bound over the width (width floored
  /// at machine epsilon). Descriptive only; verdicts never use it.
  double normalized_distance(double x) const noexcept;
  friend bool operator==(const ClosedInterval&, const ClosedInterval&) = default;
};

/// Min/max envelope of a non-empty range of values.
ClosedInterval envelope(std::span<const double> values);

/// Everything a baseline depends on. Hashed into the fingerprint.
struct BaselineConfig {
  Mode mode = Mode::Single;
  std::size_t n_s = 5000;
  std::size_t n_tr = 50;
  std::size_t n_op = 1;
  std::uint64_t seed = 0;
  double sigma_floor = kDefaultSigmaFloor;
  std::vector<Metric> roster;  // empty means default_roster(mode)
  std::uint64_t ruleset_digest = 0;

  std::size_t k() const noexcept { return n_tr - n_op - 1; }
  std::vector<Metric> effective_roster() const { return roster.empty() ? default_roster(mode) : roster; }
  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

/// Hex digest binding a baseline to its ruleset, configuration and the fixed
/// numerical conventions of this implementation.
std::string config_fingerprint(const BaselineConfig& config);

struct Baselines {
  BaselineConfig config;
  std::optional<ClosedInterval> wmi;
  std::optional<ClosedInterval> rbi;
  ClosedInterval l1;
  ClosedInterval l2;
  std::string fingerprint;

  std::optional<ClosedInterval> interval(Metric m) const;
  friend bool operator==(const Baselines&, const Baselines&) = default;
};

struct MetricResult {
  Metric metric = Metric::L1;
  std::vector<double> values;
  ClosedInterval baseline;
  std::size_t votes_out = 0;
  std::size_t votes_total = 0;
  bool flag = false;
  double normalized_distance = 0;  // of the median value
};

struct DetectionReport {
  Mode mode = Mode::Single;
  std::vector<MetricResult> per_metric;
  Verdict verdict = Verdict::InDistribution;

  const MetricResult* find(Metric m) const;
  bool ood() const noexcept { return verdict == Verdict::OutOfDistribution; }
};

/// Strict majority: more than half of the flags are set.
bool majority(const std::vector<bool>& flags);

/// Training stage for a single operational split: WMI, l1 and l2 envelopes over all
/// pairs of distinct training columns.
Baselines wmi_baseline(const HitMatrix& training, BaselineConfig config = {});

/// Operational stage for one split.
DetectionReport detect_single(const HitMatrix& training, const HitHistogram& op, const Baselines& base);

/// Training stage for groups of operational splits. TR1 is the first k columns, TR2
/// the remaining N_tr - k; the RBI envelope runs over leave-one-out folds of TR2.
Baselines rbi_baseline(const HitMatrix& training, BaselineConfig config);
/// RBI envelope alone, from explicit TR1 / TR2 groups.
ClosedInterval rbi_envelope(std::span<const HitHistogram> tr1, std::span<const HitHistogram> tr2, double sigma_floor);
/// RBI of one group against TR1 (own bank fitted on the group itself).
double group_rbi(std::span<const HitHistogram> tr1, std::span<const HitHistogram> group, double sigma_floor);

/// Operational stage for a group of N_op splits.
DetectionReport detect_group(const HitMatrix& training, std::span<const HitHistogram> op_group, const Baselines& base);

/// Throws FingerprintMismatch unless `base` was built from `training`'s ruleset with an
/// untampered configuration.
void check_compatible(const Baselines& base, const HitMatrix& training);

}  // namespace rbood
