#pragma once

#include <cstddef>
#include <deque>

namespace rbood {

/// Population moments. Skewness is m3 / m2^1.5 and kurtosis is m4 / m2^2 (not excess);
/// both are 0 when the variance is 0.
struct Moments {
  double mean = 0;
  double variance = 0;
  double skewness = 0;
  double kurtosis = 0;
};

/// Sliding-window mean, variance, skewness and kurtosis from running power sums.
///
/// Sums are kept for values shifted by a reference point taken from the window, and
/// are rebuilt from the retained values once per `capacity` evictions, so rounding
/// error does not accumulate and the amortized cost per push stays O(1).
class MomentAccumulator {
 public:
  /// capacity 0 keeps every value (no automatic eviction).
  explicit MomentAccumulator(std::size_t capacity = 0) : capacity_(capacity) {}

  /// Appends x, evicting the oldest value first when the window is full.
  void push(double x);
  /// Removes the oldest value.
  void evict();
  void clear();

  std::size_t count() const noexcept { return values_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

  double mean() const;      // count >= 1
  double variance() const;  // count >= 1
  double skewness() const;  // count >= 3
  double kurtosis() const;  // count >= 4
  Moments query() const;    // count >= 4

 private:
  struct Central {
    double mean_shifted, m2, m3, m4;
  };
  Central central() const;
  void rebase();
  void require(std::size_t n, const char* what) const;

  std::size_t capacity_;
  std::deque<double> values_;
  double shift_ = 0;
  double s1_ = 0, s2_ = 0, s3_ = 0, s4_ = 0;
  std::size_t evictions_since_rebase_ = 0;
};

/// Two-pass batch moments over a range; the reference the accumulator is checked against.
template <class It>
Moments batch_moments(It first, It last);

}  // namespace rbood

#include <cmath>
#include <iterator>

namespace rbood {

template <class It>
Moments batch_moments(It first, It last) {
  const double n = static_cast<double>(std::distance(first, last));
  Moments m;
  if (n == 0) return m;
  double sum = 0;
  for (It it = first; it != last; ++it) sum += *it;
  m.mean = sum / n;
  double c2 = 0, c3 = 0, c4 = 0;
  for (It it = first; it != last; ++it) {
    const double d = *it - m.mean;
    c2 += d * d;
    c3 += d * d * d;
    c4 += d * d * d * d;
  }
  m.variance = c2 / n;
  if (m.variance > 0) {
    m.skewness = (c3 / n) / std::pow(m.variance, 1.5);
    m.kurtosis = (c4 / n) / (m.variance * m.variance);
  }
  return m;
}

}  // namespace rbood
