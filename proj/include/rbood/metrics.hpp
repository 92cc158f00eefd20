#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rbood/histogram.hpp"

namespace rbood {

inline constexpr double kDefaultSigmaFloor = 1e-6;
inline constexpr double kProbabilityFloor = 1e-12;

// ---------------------------------------------------------------------------
// Distances

/// (sum_r |a_r - b_r|^p)^(1/p) for p in {1, 2}. Differences are formed exactly
/// from integer counts.
double lp_norm(const HitHistogram& a, const HitHistogram& b, int p);

/// Mean absolute per-rule difference, l1 / N_r.
double alpha_weight(const HitHistogram& a, const HitHistogram& b);

// ---------------------------------------------------------------------------
// Value-frequency distributions
//
// A histogram is read as a sequence of N_r exact values; the probability of a value is
// its multiplicity / N_r. The joint distribution of two histograms counts exact value
// pairs (a_r, b_r) across rules.

struct ValueDistribution {
  std::vector<double> support;        // ascending
  std::vector<double> probabilities;
};

struct JointValueDistribution {
  std::vector<std::pair<double, double>> support;  // lexicographic
  std::vector<double> probabilities;
};

ValueDistribution value_distribution(const HitHistogram& h);
JointValueDistribution joint_value_distribution(const HitHistogram& a, const HitHistogram& b);

/// H_a(a) + H_a(b) - H_a(a, b), each H_a(x) = -sum_r alpha P(x_r) ln(alpha P(x_r)) with
/// alpha = alpha_weight(a, b). Zero when the histograms are identical.
double weighted_mutual_information(const HitHistogram& a, const HitHistogram& b);

/// Unweighted form of the above (alpha fixed to 1).
double mutual_information(const HitHistogram& a, const HitHistogram& b);

// ---------------------------------------------------------------------------
// Per-rule Gaussian models of hit frequencies

struct GaussianParams {
  double mu = 0;
  double sigma = 1;
  friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

/// Maximum-likelihood fit: arithmetic mean and population standard deviation,
/// the latter floored at sigma_floor. Needs at least two values.
GaussianParams gaussian_fit(std::span<const double> values, double sigma_floor = kDefaultSigmaFloor);

/// P(lo <= X <= hi) for X ~ N(mu, sigma), unclamped. Tail-aware: both bounds on the
/// same side of the mean are evaluated with the complementary error function.
double gaussian_interval_probability(const GaussianParams& g, double lo, double hi);

/// Probability of [center - halfwidth, center + halfwidth], clamped to
/// [kProbabilityFloor, 1 - kProbabilityFloor].
double interval_mass(const GaussianParams& g, double center, double halfwidth);

enum class BankSource { TR1, TR2, OP };

struct GaussianBank {
  std::vector<GaussianParams> per_rule;
  BankSource source = BankSource::TR1;

  std::size_t size() const noexcept { return per_rule.size(); }
  const GaussianParams& operator[](std::size_t j) const { return per_rule[j]; }
};

/// One Gaussian per rule, fitted on that rule's values across the group.
GaussianBank fit_bank(std::span<const HitHistogram> group, BankSource source, double sigma_floor = kDefaultSigmaFloor);

/// -p ln p - (1-p) ln(1-p), with 0 ln 0 = 0.
double binary_entropy(double p);

/// sum_j binary_entropy(P_j), P_j = interval_mass(bank[j], h_j, bank[j].sigma).
double hits_entropy(const HitHistogram& h, const GaussianBank& own_bank);

/// sum_j gamma_j * binary_entropy(P_j) with P_j taken from ref_bank and
/// gamma_j = P_j(own_bank) / P_j(ref_bank).
double conditional_hits_entropy(const HitHistogram& h, const GaussianBank& ref_bank, const GaussianBank& own_bank);

/// Rule-based information of a group against a reference bank: the mean own entropy
/// over the mean weighted conditional entropy. 0/0 reads as 1 and x/0 as +infinity.
double rbi(std::span<const HitHistogram> group, const GaussianBank& own_bank, const GaussianBank& ref_bank);

}  // namespace rbood
