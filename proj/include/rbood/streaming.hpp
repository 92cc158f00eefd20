#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbood/detection.hpp"
#include "rbood/histogram.hpp"
#include "rbood/persist.hpp"
#include "rbood/ruleset.hpp"

namespace rbood {

/// Ring buffer of the last `capacity` hit masks with exact per-rule counts.
///
/// Each stored mask is packed into 64-bit words. A push touches only the set bits of
/// the evicted and inserted masks, so its cost is O(N_r) whatever the capacity.
class SlidingWindow {
 public:
  SlidingWindow(std::size_t capacity, std::size_t rules);

  /// Evicts the oldest mask when full, inserts `mask`, returns the current histogram.
  HitHistogram push(const HitMask& mask);

  /// counts / fill. Requires fill >= 1.
  HitHistogram histogram() const;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t rules() const noexcept { return rules_; }
  std::size_t fill() const noexcept { return fill_; }
  bool full() const noexcept { return fill_ == capacity_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

  /// Stored mask by age: 0 is the oldest retained sample.
  HitMask mask(std::size_t age) const;

  /// Counter of elementary update steps (word visits plus bit updates). Grows by at
  /// most 2 * (words + N_r) per push.
  std::uint64_t work() const noexcept { return work_; }

 private:
  std::size_t capacity_;
  std::size_t rules_;
  std::size_t words_;
  std::vector<std::uint64_t> ring_;
  std::vector<std::int64_t> counts_;
  std::size_t head_ = 0;  // slot of the oldest mask
  std::size_t fill_ = 0;
  std::uint64_t work_ = 0;
};

/// Evaluates the ruleset on `sample` and pushes its mask. An evaluation error leaves
/// the window untouched.
HitHistogram window_push(SlidingWindow& window, const Record& sample, const Ruleset& ruleset);
HitHistogram window_push(SlidingWindow& window, const BoundRuleset& bound, std::size_t row);

struct TickRecord {
  std::size_t sample_index = 0;
  DetectionReport report;
};

/// Runs detection on a full window. Single-split baselines use the window histogram
/// alone; group baselines need the N_op - 1 earlier snapshots (oldest first) to which
/// the current histogram is appended.
DetectionReport stream_detect(const SlidingWindow& window, const Baselines& base, const HitMatrix& training,
                              std::span<const HitHistogram> earlier_snapshots = {});

struct StreamConfig {
  /// Window length; 0 takes n_s from the baseline.
  std::size_t window = 0;
  /// Run detection every `stride` pushes once the window is full.
  std::size_t stride = 1;
  /// Group mode: pushes between consecutive operational snapshots; 0 means window / N_op.
  std::size_t snapshot_stride = 0;
};

/// Feeds samples through a window and emits a TickRecord per detection tick.
class StreamDetector {
 public:
  StreamDetector(const Ruleset& ruleset, BaselineBundle bundle, StreamConfig config = {});

  /// Pushes one sample; returns a record when a detection ran on this push.
  std::optional<TickRecord> push(const Record& sample);
  std::optional<TickRecord> push(const BoundRuleset& bound, std::size_t row);
  std::optional<TickRecord> push_mask(const HitMask& mask);

  const SlidingWindow& window() const noexcept { return window_; }
  const BaselineBundle& bundle() const noexcept { return bundle_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::size_t snapshot_stride() const noexcept { return snapshot_stride_; }

 private:
  std::optional<TickRecord> after_push(HitHistogram current);

  Ruleset ruleset_;
  BaselineBundle bundle_;
  StreamConfig config_;
  SlidingWindow window_;
  std::size_t snapshot_stride_ = 0;
  std::deque<HitHistogram> history_;  // group mode: recent full-window histograms
  std::size_t pushed_ = 0;
  std::vector<std::string> warnings_;
};

/// CSV header and rows for tick records: one row per metric, the metric's median
/// value against its baseline bounds.
void write_tick_header(std::ostream& out);
void write_tick_rows(std::ostream& out, const TickRecord& tick);

}  // namespace rbood
