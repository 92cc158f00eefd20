#include "rbood/moments.hpp"

#include <cmath>

#include "rbood/error.hpp"

namespace rbood {

void MomentAccumulator::push(double x) {
  if (!std::isfinite(x)) throw DataError("moment accumulator accepts finite values only");
  if (capacity_ && values_.size() == capacity_) evict();
  if (values_.empty()) {
    shift_ = x;
    s1_ = s2_ = s3_ = s4_ = 0;
    evictions_since_rebase_ = 0;
  }
  values_.push_back(x);
  const double y = x - shift_;
  const double y2 = y * y;
  s1_ += y;
  s2_ += y2;
  s3_ += y2 * y;
  s4_ += y2 * y2;
}

void MomentAccumulator::evict() {
  if (values_.empty()) throw DataError("evict on an empty accumulator");
  const double y = values_.front() - shift_;
  values_.pop_front();
  const double y2 = y * y;
  s1_ -= y;
  s2_ -= y2;
  s3_ -= y2 * y;
  s4_ -= y2 * y2;
  if (values_.empty()) {
    s1_ = s2_ = s3_ = s4_ = 0;
    evictions_since_rebase_ = 0;
  } else if (++evictions_since_rebase_ >= values_.size()) {
    rebase();
  }
}

void MomentAccumulator::clear() {
  values_.clear();
  s1_ = s2_ = s3_ = s4_ = 0;
  evictions_since_rebase_ = 0;
}

void MomentAccumulator::rebase() {
  shift_ = values_.front();
  s1_ = s2_ = s3_ = s4_ = 0;
  for (double x : values_) {
    const double y = x - shift_;
    const double y2 = y * y;
    s1_ += y;
    s2_ += y2;
    s3_ += y2 * y;
    s4_ += y2 * y2;
  }
  evictions_since_rebase_ = 0;
}

void MomentAccumulator::require(std::size_t n, const char* what) const {
  if (values_.size() < n)
    throw DataError(std::string(what) + " needs at least " + std::to_string(n) + " values, have " +
                    std::to_string(values_.size()));
}

MomentAccumulator::Central MomentAccumulator::central() const {
  const double n = static_cast<double>(values_.size());
  const double a = s1_ / n;
  const double r2 = s2_ / n, r3 = s3_ / n, r4 = s4_ / n;
  const double a2 = a * a;
  double m2 = r2 - a2;
  double m3 = r3 - 3 * a * r2 + 2 * a2 * a;
  double m4 = r4 - 4 * a * r3 + 6 * a2 * r2 - 3 * a2 * a2;
  // Anything at rounding level relative to the raw second moment is a flat window.
  if (m2 <= 1e-13 * r2 || m2 <= 0) m2 = m3 = m4 = 0;
  return {a, m2, m3, m4};
}

double MomentAccumulator::mean() const {
  require(1, "mean");
  return shift_ + s1_ / static_cast<double>(values_.size());
}

double MomentAccumulator::variance() const {
  require(1, "variance");
  return central().m2;
}

double MomentAccumulator::skewness() const {
  require(3, "skewness");
  auto c = central();
  return c.m2 > 0 ? c.m3 / std::pow(c.m2, 1.5) : 0.0;
}

double MomentAccumulator::kurtosis() const {
  require(4, "kurtosis");
  auto c = central();
  return c.m2 > 0 ? c.m4 / (c.m2 * c.m2) : 0.0;
}

Moments MomentAccumulator::query() const {
  require(4, "kurtosis");
  auto c = central();
  Moments m;
  m.mean = shift_ + c.mean_shifted;
  m.variance = c.m2;
  if (c.m2 > 0) {
    m.skewness = c.m3 / std::pow(c.m2, 1.5);
    m.kurtosis = c.m4 / (c.m2 * c.m2);
  }
  return m;
}

}  // namespace rbood
