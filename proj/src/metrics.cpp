#include "rbood/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "rbood/error.hpp"

namespace rbood {

namespace {

void check_lengths(const HitHistogram& a, const HitHistogram& b) {
  if (a.size() != b.size())
    throw DataError("histogram length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  if (a.size() == 0) throw DataError("empty histogram");
}

// Exact |a_r - b_r| scaled by n_a * n_b.
std::int64_t scaled_gap(const HitHistogram& a, const HitHistogram& b, std::size_t r) {
  std::int64_t x = a.count(r) * b.split_size() - b.count(r) * a.split_size();
  return x < 0 ? -x : x;
}

// For each index r, how many indices share key(r).
template <class Key>
std::vector<std::size_t> multiplicities(std::size_t n, Key key) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return key(i) < key(j); });
  std::vector<std::size_t> mult(n);
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && key(order[hi]) == key(order[lo])) ++hi;
    for (std::size_t k = lo; k < hi; ++k) mult[order[k]] = hi - lo;
    lo = hi;
  }
  return mult;
}

// -sum_r w P_r ln(w P_r) with P_r = mult_r / n.
double weighted_entropy(const std::vector<std::size_t>& mult, double w) {
  const double n = static_cast<double>(mult.size());
  double h = 0;
  for (auto m : mult) {
    double q = w * (static_cast<double>(m) / n);
    h -= q * std::log(q);
  }
  return h;
}

double weighted_mi(const HitHistogram& a, const HitHistogram& b, double w) {
  const std::size_t n = a.size();
  auto ma = multiplicities(n, [&](std::size_t r) { return a.count(r); });
  auto mb = multiplicities(n, [&](std::size_t r) { return b.count(r); });
  auto mab = multiplicities(n, [&](std::size_t r) { return std::pair(a.count(r), b.count(r)); });
  return weighted_entropy(ma, w) + weighted_entropy(mb, w) - weighted_entropy(mab, w);
}

}  // namespace

double lp_norm(const HitHistogram& a, const HitHistogram& b, int p) {
  check_lengths(a, b);
  const double scale = static_cast<double>(a.split_size()) * static_cast<double>(b.split_size());
  if (p == 1) {
    std::int64_t sum = 0;
    for (std::size_t r = 0; r < a.size(); ++r) sum += scaled_gap(a, b, r);
    return static_cast<double>(sum) / scale;
  }
  if (p == 2) {
    // Squared gaps can exceed 64 bits for large n_s; accumulate in long double.
    long double sum = 0;
    for (std::size_t r = 0; r < a.size(); ++r) {
      auto g = static_cast<long double>(scaled_gap(a, b, r));
      sum += g * g;
    }
    return static_cast<double>(std::sqrt(sum) / static_cast<long double>(scale));
  }
  throw ConfigError("lp_norm supports p = 1 or p = 2");
}

double alpha_weight(const HitHistogram& a, const HitHistogram& b) {
  return lp_norm(a, b, 1) / static_cast<double>(a.size());
}

ValueDistribution value_distribution(const HitHistogram& h) {
  std::vector<std::int64_t> counts = h.counts();
  std::sort(counts.begin(), counts.end());
  ValueDistribution d;
  const double n = static_cast<double>(counts.size());
  for (std::size_t lo = 0; lo < counts.size();) {
    std::size_t hi = lo;
    while (hi < counts.size() && counts[hi] == counts[lo]) ++hi;
    d.support.push_back(static_cast<double>(counts[lo]) / static_cast<double>(h.split_size()));
    d.probabilities.push_back(static_cast<double>(hi - lo) / n);
    lo = hi;
  }
  return d;
}

JointValueDistribution joint_value_distribution(const HitHistogram& a, const HitHistogram& b) {
  check_lengths(a, b);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  pairs.reserve(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) pairs.emplace_back(a.count(r), b.count(r));
  std::sort(pairs.begin(), pairs.end());
  JointValueDistribution d;
  const double n = static_cast<double>(pairs.size());
  for (std::size_t lo = 0; lo < pairs.size();) {
    std::size_t hi = lo;
    while (hi < pairs.size() && pairs[hi] == pairs[lo]) ++hi;
    d.support.emplace_back(static_cast<double>(pairs[lo].first) / static_cast<double>(a.split_size()),
                           static_cast<double>(pairs[lo].second) / static_cast<double>(b.split_size()));
    d.probabilities.push_back(static_cast<double>(hi - lo) / n);
    lo = hi;
  }
  return d;
}

double weighted_mutual_information(const HitHistogram& a, const HitHistogram& b) {
  check_lengths(a, b);
  const double alpha = alpha_weight(a, b);
  if (alpha == 0.0) return 0.0;
  return weighted_mi(a, b, alpha);
}

double mutual_information(const HitHistogram& a, const HitHistogram& b) {
  check_lengths(a, b);
  return weighted_mi(a, b, 1.0);
}

GaussianParams gaussian_fit(std::span<const double> values, double sigma_floor) {
  if (values.size() < 2) throw DataError("a Gaussian fit needs at least two values");
  if (!(sigma_floor > 0)) throw ConfigError("sigma floor must be positive");
  const double n = static_cast<double>(values.size());
  // offsets from the first value keep equal inputs exact whatever the count
  const double ref = values.front();
  double offset = 0;
  for (double v : values) offset += v - ref;
  const double mean = ref + offset / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::max(std::sqrt(ss / n), sigma_floor)};
}

double gaussian_interval_probability(const GaussianParams& g, double lo, double hi) {
  if (hi < lo) return 0.0;
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double zl = (lo - g.mu) / g.sigma * inv_sqrt2;
  const double zh = (hi - g.mu) / g.sigma * inv_sqrt2;
  double p;
  if (zl >= 0)
    p = 0.5 * (std::erfc(zl) - std::erfc(zh));
  else if (zh <= 0)
    p = 0.5 * (std::erfc(-zh) - std::erfc(-zl));
  else
    p = 1.0 - 0.5 * std::erfc(-zl) - 0.5 * std::erfc(zh);
  return std::clamp(p, 0.0, 1.0);
}

double interval_mass(const GaussianParams& g, double center, double halfwidth) {
  if (!(halfwidth >= 0)) throw ConfigError("interval half-width must be non-negative");
  double p = gaussian_interval_probability(g, center - halfwidth, center + halfwidth);
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

GaussianBank fit_bank(std::span<const HitHistogram> group, BankSource source, double sigma_floor) {
  if (group.size() < 2) throw DataError("a Gaussian bank needs at least two histograms");
  const std::size_t nr = group.front().size();
  for (const auto& h : group)
    if (h.size() != nr) throw DataError("histogram length mismatch inside group");
  GaussianBank bank;
  bank.source = source;
  bank.per_rule.reserve(nr);
  std::vector<double> column(group.size());
  for (std::size_t j = 0; j < nr; ++j) {
    for (std::size_t i = 0; i < group.size(); ++i) column[i] = group[i].value(j);
    bank.per_rule.push_back(gaussian_fit(column, sigma_floor));
  }
  return bank;
}

double binary_entropy(double p) {
  double h = 0;
  if (p > 0) h -= p * std::log(p);
  if (p < 1) h -= (1 - p) * std::log1p(-p);
  return h;
}

double hits_entropy(const HitHistogram& h, const GaussianBank& own_bank) {
  if (h.size() != own_bank.size()) throw DataError("histogram and Gaussian bank lengths differ");
  double sum = 0;
  for (std::size_t j = 0; j < h.size(); ++j)
    sum += binary_entropy(interval_mass(own_bank[j], h.value(j), own_bank[j].sigma));
  return sum;
}

double conditional_hits_entropy(const HitHistogram& h, const GaussianBank& ref_bank, const GaussianBank& own_bank) {
  if (h.size() != ref_bank.size() || h.size() != own_bank.size())
    throw DataError("histogram and Gaussian bank lengths differ");
  double sum = 0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double x = h.value(j);
    const double p_ref = interval_mass(ref_bank[j], x, ref_bank[j].sigma);
    const double p_own = interval_mass(own_bank[j], x, own_bank[j].sigma);
    sum += (p_own / p_ref) * binary_entropy(p_ref);
  }
  return sum;
}

double rbi(std::span<const HitHistogram> group, const GaussianBank& own_bank, const GaussianBank& ref_bank) {
  if (group.empty()) throw DataError("rule-based information needs a non-empty group");
  double num = 0;
  double den = 0;
  for (const auto& h : group) {
    num += hits_entropy(h, own_bank);
    den += conditional_hits_entropy(h, ref_bank, own_bank);
  }
  const double n = static_cast<double>(group.size());
  num /= n;
  den /= n;
  if (den == 0) return num == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace rbood
