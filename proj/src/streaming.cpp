#include "rbood/streaming.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

#include "rbood/error.hpp"

namespace rbood {

SlidingWindow::SlidingWindow(std::size_t capacity, std::size_t rules)
    : capacity_(capacity), rules_(rules), words_((rules + 63) / 64), counts_(rules, 0) {
  if (capacity_ == 0) throw ConfigError("window capacity must be positive");
  if (rules_ == 0) throw ConfigError("window needs at least one rule");
  ring_.assign(capacity_ * words_, 0);
}

HitHistogram SlidingWindow::push(const HitMask& mask) {
  if (mask.size() != rules_) throw DataError("hit mask length differs from window rule count");
  std::size_t slot;
  if (fill_ == capacity_) {
    slot = head_;
    head_ = (head_ + 1) % capacity_;
    std::uint64_t* old = &ring_[slot * words_];
    for (std::size_t w = 0; w < words_; ++w) {
      ++work_;
      for (std::uint64_t bits = old[w]; bits; bits &= bits - 1) {
        --counts_[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
        ++work_;
      }
      old[w] = 0;
    }
  } else {
    slot = (head_ + fill_) % capacity_;
    ++fill_;
  }
  std::uint64_t* dst = &ring_[slot * words_];
  for (std::size_t r = 0; r < rules_; ++r) {
    ++work_;
    if (mask[r]) {
      dst[r / 64] |= std::uint64_t{1} << (r % 64);
      ++counts_[r];
    }
  }
  return histogram();
}

HitHistogram SlidingWindow::histogram() const {
  if (fill_ == 0) throw DataError("window is empty");
  return HitHistogram(counts_, static_cast<std::int64_t>(fill_), Origin::Operational);
}

HitMask SlidingWindow::mask(std::size_t age) const {
  if (age >= fill_) throw DataError("window age out of range");
  const std::uint64_t* src = &ring_[((head_ + age) % capacity_) * words_];
  HitMask m(rules_);
  for (std::size_t r = 0; r < rules_; ++r) m[r] = (src[r / 64] >> (r % 64)) & 1u;
  return m;
}

HitHistogram window_push(SlidingWindow& window, const Record& sample, const Ruleset& ruleset) {
  auto mask = ruleset_hits(ruleset, sample);
  return window.push(mask);
}

HitHistogram window_push(SlidingWindow& window, const BoundRuleset& bound, std::size_t row) {
  HitMask mask;
  bound.hits(row, mask);
  return window.push(mask);
}

DetectionReport stream_detect(const SlidingWindow& window, const Baselines& base, const HitMatrix& training,
                              std::span<const HitHistogram> earlier_snapshots) {
  if (!window.full()) throw DataError("window is not full");
  if (base.config.mode == Mode::Single) return detect_single(training, window.histogram(), base);
  if (earlier_snapshots.size() + 1 != base.config.n_op)
    throw DataError("group detection needs " + std::to_string(base.config.n_op - 1) + " earlier snapshots");
  std::vector<HitHistogram> group(earlier_snapshots.begin(), earlier_snapshots.end());
  group.push_back(window.histogram());
  return detect_group(training, group, base);
}

StreamDetector::StreamDetector(const Ruleset& ruleset, BaselineBundle bundle, StreamConfig config)
    : ruleset_(ruleset),
      bundle_(std::move(bundle)),
      config_(config),
      window_(config.window ? config.window : bundle_.baselines.config.n_s, ruleset.size()) {
  check_compatible(bundle_.baselines, bundle_.training);
  if (bundle_.training.ruleset_digest != ruleset.digest())
    throw FingerprintMismatch("baseline was built with a different ruleset");
  if (config_.stride == 0) throw ConfigError("detection stride must be positive");
  const auto& bc = bundle_.baselines.config;
  if (window_.capacity() != bc.n_s)
    warnings_.push_back("stream window " + std::to_string(window_.capacity()) + " differs from baseline n_s " +
                        std::to_string(bc.n_s) + "; expect a shifted false-positive rate");
  if (bc.mode == Mode::Group) {
    snapshot_stride_ = config_.snapshot_stride ? config_.snapshot_stride : std::max<std::size_t>(1, window_.capacity() / bc.n_op);
  }
}

std::optional<TickRecord> StreamDetector::push(const Record& sample) {
  return after_push(window_push(window_, sample, ruleset_));
}

std::optional<TickRecord> StreamDetector::push(const BoundRuleset& bound, std::size_t row) {
  return after_push(window_push(window_, bound, row));
}

std::optional<TickRecord> StreamDetector::push_mask(const HitMask& mask) { return after_push(window_.push(mask)); }

std::optional<TickRecord> StreamDetector::after_push(HitHistogram current) {
  const std::size_t index = pushed_++;
  if (!window_.full()) return std::nullopt;
  const auto& bc = bundle_.baselines.config;
  std::vector<HitHistogram> earlier;
  if (bc.mode == Mode::Group) {
    // history_ holds the full-window histograms of the last (N_op - 1) * stride pushes.
    const std::size_t span = (bc.n_op - 1) * snapshot_stride_;
    history_.push_back(current);
    if (history_.size() > span + 1) history_.pop_front();
    if (history_.size() < span + 1) return std::nullopt;
    for (std::size_t q = 0; q + 1 < bc.n_op; ++q) earlier.push_back(history_[q * snapshot_stride_]);
  }
  if ((index + 1 - window_.capacity()) % config_.stride != 0) return std::nullopt;
  TickRecord rec;
  rec.sample_index = index;
  rec.report = stream_detect(window_, bundle_.baselines, bundle_.training, earlier);
  return rec;
}

void write_tick_header(std::ostream& out) { out << "sample_index,metric,value,base_min,base_max,flag,verdict\n"; }

void write_tick_rows(std::ostream& out, const TickRecord& tick) {
  for (const auto& m : tick.report.per_metric) {
    std::vector<double> v = m.values;
    std::sort(v.begin(), v.end());
    const double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    out << tick.sample_index << ',' << to_string(m.metric) << ',' << med << ',' << m.baseline.min << ','
        << m.baseline.max << ',' << (m.flag ? "on" : "off") << ',' << to_string(tick.report.verdict) << '\n';
  }
}

}  // namespace rbood
