#include "rbood/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "rbood/error.hpp"
#include "rbood/histogram.hpp"

namespace rbood {

namespace {

struct RepOutcome {
  bool fp = false;
  bool fn = false;
  std::map<Metric, bool> flag_in, flag_out;
};

std::vector<HitHistogram> unit_histograms(const Ruleset& rules, const DataSource& src, std::size_t n_s,
                                          std::size_t n_splits, std::uint64_t seed, Origin origin) {
  auto data = src(n_s * n_splits, seed);
  BoundRuleset bound(rules, data);
  auto idx = split_indices(data.rows(), n_s, n_splits, derive_seed(seed, 1));
  std::vector<HitHistogram> out;
  for (const auto& rows : idx) out.push_back(hit_histogram(bound, rows, origin));
  return out;
}

DetectionReport judge(const HitMatrix& m, const std::vector<HitHistogram>& unit, const Baselines& b) {
  return b.config.mode == Mode::Single ? detect_single(m, unit.front(), b) : detect_group(m, unit, b);
}

RepOutcome run_repetition(const DataSource& in, const DataSource& out, const EvalConfig& c,
                          const std::optional<Ruleset>& given, std::size_t rep) {
  const std::uint64_t s = derive_seed(c.seed, rep);
  auto train = in(c.n_tr * c.n_s, derive_seed(s, 10));
  Ruleset rules = given ? *given : tree_to_rules(induce_tree(train, c.inducer));

  HitMatrix m;
  m.ruleset_digest = rules.digest();
  {
    BoundRuleset bound(rules, train);
    for (const auto& rows : split_indices(train.rows(), c.n_s, c.n_tr, derive_seed(s, 11)))
      m.training.push_back(hit_histogram(bound, rows, Origin::Training));
  }

  BaselineConfig bc;
  bc.mode = c.mode;
  bc.n_s = c.n_s;
  bc.n_tr = c.n_tr;
  bc.n_op = c.mode == Mode::Single ? 1 : c.n_op;
  bc.seed = s;
  bc.sigma_floor = c.sigma_floor;
  bc.roster = c.roster;
  Baselines base = c.mode == Mode::Single ? wmi_baseline(m, bc) : rbi_baseline(m, bc);

  auto held_out = unit_histograms(rules, in, c.n_s, bc.n_op, derive_seed(s, 20), Origin::Operational);
  auto shifted = unit_histograms(rules, out, c.n_s, bc.n_op, derive_seed(s, 30), Origin::Operational);
  auto r_in = judge(m, held_out, base);
  auto r_out = judge(m, shifted, base);

  RepOutcome o;
  o.fp = r_in.ood();
  o.fn = !r_out.ood();
  for (const auto& r : r_in.per_metric) o.flag_in[r.metric] = r.flag;
  for (const auto& r : r_out.per_metric) o.flag_out[r.metric] = r.flag;
  return o;
}

}  // namespace

EvalSummary evaluate(const DataSource& in, const DataSource& out, const EvalConfig& config,
                     const std::optional<Ruleset>& rules, std::string scenario) {
  if (config.repetitions == 0) throw ConfigError("repetitions must be positive");
  if (config.mode == Mode::Group && (config.n_op < 2 || config.n_tr < config.n_op + 3))
    throw ConfigError("group mode needs N_op >= 2 and N_tr - N_op - 1 >= 2");
  if (config.mode == Mode::Single && config.n_tr < 2) throw ConfigError("single mode needs N_tr >= 2");

  std::vector<RepOutcome> outcomes(config.repetitions);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t threads = std::clamp<std::size_t>(
      config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency()), 1, config.repetitions);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t rep; (rep = next++) < config.repetitions;) {
          try {
            outcomes[rep] = run_repetition(in, out, config, rules, rep);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = config.repetitions;
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);

  EvalSummary s;
  s.repetitions = config.repetitions;
  s.scenario = std::move(scenario);
  std::map<Metric, std::size_t> in_counts, out_counts;
  for (const auto& o : outcomes) {
    s.false_positives += o.fp;
    s.false_negatives += o.fn;
    for (const auto& [m, f] : o.flag_in) in_counts[m] += f;
    for (const auto& [m, f] : o.flag_out) out_counts[m] += f;
  }
  const double n = static_cast<double>(config.repetitions);
  s.fpr = static_cast<double>(s.false_positives) / n;
  s.fnr = static_cast<double>(s.false_negatives) / n;
  for (const auto& [m, c] : in_counts) s.flag_rate_in[m] = static_cast<double>(c) / n;
  for (const auto& [m, c] : out_counts) s.flag_rate_out[m] = static_cast<double>(c) / n;
  return s;
}

}  // namespace rbood
