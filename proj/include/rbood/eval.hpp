#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbood/detection.hpp"
#include "rbood/inducer.hpp"
#include "rbood/ruleset.hpp"
#include "rbood/synthetic.hpp"

namespace rbood {

struct EvalConfig {
  Mode mode = Mode::Single;
  std::size_t n_s = 5000;
  std::size_t n_tr = 50;
  std::size_t n_op = 1;
  std::size_t repetitions = 200;
  std::uint64_t seed = 0;
  double sigma_floor = kDefaultSigmaFloor;
  std::vector<Metric> roster;  // empty: default for the mode
  InducerConfig inducer;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct EvalSummary {
  std::size_t repetitions = 0;
  std::size_t false_positives = 0;   // held-out in-distribution units flagged
  std::size_t false_negatives = 0;   // out-of-distribution units not flagged
  double fpr = 0;
  double fnr = 0;
  std::map<Metric, double> flag_rate_in;   // per-metric flag rate on in-distribution units
  std::map<Metric, double> flag_rate_out;  // ... and on out-of-distribution units
  std::string scenario;
};

/// Repeated train/detect cycles. Each repetition draws N_tr * n_s training rows from
/// `in`, builds the baseline (inducing rules unless `rules` is given), then judges one
/// fresh in-distribution unit and one unit from `out`. A unit is one split in single
/// mode and N_op splits in group mode. Repetitions run in parallel; results are
/// aggregated in repetition order.
EvalSummary evaluate(const DataSource& in, const DataSource& out, const EvalConfig& config,
                     const std::optional<Ruleset>& rules = std::nullopt, std::string scenario = {});

}  // namespace rbood
