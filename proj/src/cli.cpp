#include "rbood/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbood/detection.hpp"
#include "rbood/error.hpp"
#include "rbood/eval.hpp"
#include "rbood/histogram.hpp"
#include "rbood/inducer.hpp"
#include "rbood/moments.hpp"
#include "rbood/persist.hpp"
#include "rbood/ruleset.hpp"
#include "rbood/streaming.hpp"
#include "rbood/synthetic.hpp"
#include "rbood/table.hpp"

namespace rbood::cli {

namespace {

using nlohmann::ordered_json;

/// Every tunable of a run. Repetitions default to 200; --full-scale gives 2500.
struct RunConfig {
  std::string mode = "single";
  std::size_t n_s = 5000;
  std::size_t n_tr = 50;
  std::size_t n_op = 0;  // 0: 1 in single mode, 10 in group mode
  std::uint64_t seed = 0;
  double sigma_floor = kDefaultSigmaFloor;
  std::string metrics;  // comma list; empty: mode default
  std::string label = "label";
  std::size_t stride = 1;
  std::size_t snapshot_stride = 0;
  std::size_t window = 0;
  std::size_t repetitions = 200;
  bool full_scale = false;
  std::size_t max_depth = 4;
  std::size_t min_leaf = 50;
  std::size_t threads = 0;
  std::string format = "json-document";

  Mode parsed_mode() const { return mode_from_string(mode); }
  std::size_t effective_n_op() const { return n_op ? n_op : (parsed_mode() == Mode::Single ? 1 : 10); }
  std::vector<Metric> roster() const {
    std::vector<Metric> out;
    std::stringstream ss(metrics);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) out.push_back(metric_from_string(item));
    return out;
  }
};

/// Binds the config-file keys to CLI options so that explicit flags win over the file.
class Options {
 public:
  Options(CLI::App* app, RunConfig& cfg) : app_(app), cfg_(cfg) {
    app_->add_option("--config", config_file_, "Flat key=value config file (flags override it)");
  }

  template <class T>
  void add(const std::string& key, const std::string& flag, T& target, const std::string& help) {
    auto* opt = app_->add_option(flag, target, help)->capture_default_str();
    setters_[key] = {opt, [&target](const std::string& v) {
                       if constexpr (std::is_same_v<T, std::string>) {
                         target = v;
                       } else if constexpr (std::is_same_v<T, double>) {
                         auto d = parse_real(v);
                         if (!d) throw ConfigError("config value '" + v + "' is not a number");
                         target = *d;
                       } else {
                         std::size_t pos = 0;
                         unsigned long long n = std::stoull(v, &pos);
                         if (pos != v.size()) throw ConfigError("config value '" + v + "' is not an integer");
                         target = static_cast<T>(n);
                       }
                     }};
  }

  /// Applies the config file to every option not given on the command line.
  void apply_file() const {
    if (config_file_.empty() || !app_->parsed()) return;
    std::ifstream in(config_file_);
    if (!in) throw ConfigError("cannot open config file '" + config_file_ + "'");
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto eq = line.find('=');
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      if (trim(line).empty()) continue;
      if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key=value");
      auto key = trim(line.substr(0, eq));
      auto value = trim(line.substr(eq + 1));
      auto it = setters_.find(key);
      if (it == setters_.end()) continue;  // keys for other subcommands
      if (it->second.first->count() == 0) it->second.second(value);
    }
  }

 private:
  CLI::App* app_;
  RunConfig& cfg_;
  std::string config_file_;
  std::map<std::string, std::pair<CLI::Option*, std::function<void(const std::string&)>>> setters_;
};

/// Reads a CSV; a column named `label` becomes the row labels when present.
FeatureTable read_table(const std::string& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  auto names = split_csv_line(header);
  bool has_label = std::find(names.begin(), names.end(), label) != names.end();
  in.seekg(0);
  return read_csv(in, has_label ? std::optional<std::string>(label) : std::nullopt);
}

BaselineConfig baseline_config(const RunConfig& c) {
  BaselineConfig bc;
  bc.mode = c.parsed_mode();
  bc.n_s = c.n_s;
  bc.n_tr = c.n_tr;
  bc.n_op = c.effective_n_op();
  bc.seed = c.seed;
  bc.sigma_floor = c.sigma_floor;
  bc.roster = c.roster();
  return bc;
}

void print_intervals(std::ostream& out, const Baselines& b) {
  out << "metric  min          max\n";
  auto row = [&](std::string_view name, const ClosedInterval& i) {
    out << std::left << std::setw(8) << name << std::setw(13) << i.min << i.max << '\n';
  };
  out << std::setprecision(6);
  if (b.wmi) row("wmi", *b.wmi);
  if (b.rbi) row("rbi", *b.rbi);
  row("l1", b.l1);
  row("l2", b.l2);
}

// ---------------------------------------------------------------------------

int cmd_induce(const RunConfig& c, const std::string& data, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
  auto table = read_csv_file(data, c.label);
  InducerConfig ic{c.max_depth, c.min_leaf};
  auto rules = tree_to_rules(induce_tree(table, ic));
  auto text = format_ruleset(rules);
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw DataError("cannot write '" + out_path + "'");
    f << text;
  }
  err << "induced " << rules.size() << " rules\n";
  return kExitInDistribution;
}

int cmd_baseline(const RunConfig& c, const std::string& data, const std::string& rules_path,
                 const std::string& out_path, std::ostream& out, std::ostream& err) {
  auto bc = baseline_config(c);
  if (bc.mode == Mode::Group && bc.n_op < 2)
    throw ConfigError("group mode needs N_op >= 2 (per-rule Gaussian fits need two splits)");
  if (bc.mode == Mode::Group && bc.n_tr < bc.n_op + 3)
    throw ConfigError("group mode needs k = N_tr - N_op - 1 >= 2");
  auto rules = read_ruleset_file(rules_path);
  auto table = read_table(data, c.label);
  auto splits = make_splits(table, c.n_s, c.n_tr, c.seed);
  auto matrix = hit_matrix(rules, splits, {});
  for (const auto& w : ruleset_warnings(rules, matrix)) err << "warning: " << w << '\n';
  BaselineBundle bundle;
  bundle.baselines = bc.mode == Mode::Single ? wmi_baseline(matrix, bc) : rbi_baseline(matrix, bc);
  bundle.training = std::move(matrix);
  save_baselines(out_path, bundle);
  out << "mode " << to_string(bc.mode) << ", n_s " << bc.n_s << ", N_tr " << bc.n_tr << ", N_op " << bc.n_op;
  if (bc.mode == Mode::Group) out << ", k " << bc.k();
  out << ", fingerprint " << bundle.baselines.fingerprint << '\n';
  print_intervals(out, bundle.baselines);
  return kExitInDistribution;
}

struct Loaded {
  Ruleset rules;
  BaselineBundle bundle;
};

Loaded load(const std::string& rules_path, const std::string& baseline_path) {
  Loaded l{read_ruleset_file(rules_path), load_baselines(baseline_path)};
  check_compatible(l.bundle.baselines, l.bundle.training);
  if (l.rules.digest() != l.bundle.baselines.config.ruleset_digest)
    throw FingerprintMismatch("baseline was built with a different ruleset than '" + rules_path + "'");
  return l;
}

int cmd_detect(const RunConfig& c, const std::string& data, const std::string& rules_path,
               const std::string& baseline_path, std::ostream& out, std::ostream& err) {
  auto l = load(rules_path, baseline_path);
  const auto& bc = l.bundle.baselines.config;
  auto table = read_table(data, c.label);
  BoundRuleset bound(l.rules, table);
  DetectionReport report;
  if (bc.mode == Mode::Single) {
    if (table.rows() != bc.n_s)
      err << "warning: operational split has " << table.rows() << " rows, baseline n_s is " << bc.n_s << '\n';
    std::vector<std::size_t> rows(table.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    report = detect_single(l.bundle.training, hit_histogram(bound, rows, Origin::Operational), l.bundle.baselines);
  } else {
    const std::size_t chunk = table.rows() / bc.n_op;
    if (chunk == 0) throw DataError("operational data has fewer rows than N_op");
    if (chunk != bc.n_s)
      err << "warning: operational splits have " << chunk << " rows, baseline n_s is " << bc.n_s << '\n';
    std::vector<HitHistogram> group;
    for (std::size_t g = 0; g < bc.n_op; ++g) {
      std::vector<std::size_t> rows(chunk);
      std::iota(rows.begin(), rows.end(), g * chunk);
      group.push_back(hit_histogram(bound, rows, Origin::Operational));
    }
    report = detect_group(l.bundle.training, group, l.bundle.baselines);
  }
  if (c.format == "csv") {
    out << "metric,votes_out,votes_total,flag,normalized_distance,base_min,base_max,verdict\n";
    for (const auto& m : report.per_metric)
      out << to_string(m.metric) << ',' << m.votes_out << ',' << m.votes_total << ',' << (m.flag ? "on" : "off")
          << ',' << m.normalized_distance << ',' << m.baseline.min << ',' << m.baseline.max << ','
          << to_string(report.verdict) << '\n';
  } else {
    out << report_to_text(report, bc);
  }
  return report.ood() ? kExitOutOfDistribution : kExitInDistribution;
}

int cmd_stream(const RunConfig& c, const std::string& data, const std::string& rules_path,
               const std::string& baseline_path, std::istream& in, std::ostream& out, std::ostream& err) {
  auto l = load(rules_path, baseline_path);
  StreamConfig sc;
  sc.window = c.window;
  sc.stride = c.stride;
  sc.snapshot_stride = c.snapshot_stride;
  StreamDetector detector(l.rules, std::move(l.bundle), sc);
  for (const auto& w : detector.warnings()) err << "warning: " << w << '\n';

  std::unique_ptr<std::ifstream> file;
  std::istream* src = &in;
  if (!data.empty() && data != "-") {
    file = std::make_unique<std::ifstream>(data);
    if (!*file) throw DataError("cannot open '" + data + "'");
    src = file.get();
  }
  std::string line;
  if (!std::getline(*src, line)) throw DataError("stream has no header row");
  auto header = split_csv_line(line);
  out << std::setprecision(10);
  write_tick_header(out);
  std::size_t line_no = 1;
  bool any_ood = false;
  while (std::getline(*src, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("stream line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields");
    Record rec;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (auto v = parse_real(fields[i]))
        rec.emplace(header[i], *v);
      else
        rec.emplace(header[i], fields[i]);
    }
    if (auto tick = detector.push(rec)) {
      write_tick_rows(out, *tick);
      any_ood = any_ood || tick->report.ood();
    }
  }
  return any_ood ? kExitOutOfDistribution : kExitInDistribution;
}

DataSource source(const std::string& spec, const std::string& label) {
  std::ifstream probe(spec);
  if (probe) return table_source(read_table(spec, label));
  return parse_generator(spec);
}

int cmd_eval(const RunConfig& c, const std::string& in_spec, const std::string& out_spec, const std::string& rules_path,
             std::ostream& out) {
  EvalConfig ec;
  ec.mode = c.parsed_mode();
  ec.n_s = c.n_s;
  ec.n_tr = c.n_tr;
  ec.n_op = c.effective_n_op();
  ec.repetitions = c.full_scale ? 2500 : c.repetitions;
  ec.seed = c.seed;
  ec.sigma_floor = c.sigma_floor;
  ec.roster = c.roster();
  ec.inducer = {c.max_depth, c.min_leaf};
  ec.threads = c.threads;
  std::optional<Ruleset> rules;
  if (!rules_path.empty()) rules = read_ruleset_file(rules_path);
  auto summary = evaluate(source(in_spec, c.label), source(out_spec, c.label), ec, rules,
                          "in=" + in_spec + " out=" + out_spec);

  ordered_json in_rates = ordered_json::object(), out_rates = ordered_json::object();
  for (const auto& [m, r] : summary.flag_rate_in) in_rates[std::string(to_string(m))] = r;
  for (const auto& [m, r] : summary.flag_rate_out) out_rates[std::string(to_string(m))] = r;
  ordered_json doc{{"scenario", summary.scenario},
                   {"mode", std::string(to_string(ec.mode))},
                   {"repetitions", summary.repetitions},
                   {"fpr", summary.fpr},
                   {"fnr", summary.fnr},
                   {"false_positives", summary.false_positives},
                   {"false_negatives", summary.false_negatives},
                   {"flag_rate_in", in_rates},
                   {"flag_rate_out", out_rates},
                   {"config",
                    {{"n_s", ec.n_s},
                     {"n_tr", ec.n_tr},
                     {"n_op", ec.mode == Mode::Single ? 1 : ec.n_op},
                     {"seed", ec.seed},
                     {"sigma_floor", ec.sigma_floor},
                     {"max_depth", ec.inducer.max_depth},
                     {"min_leaf", ec.inducer.min_leaf}}}};
  out << doc.dump(2) << '\n';
  return kExitInDistribution;
}

int cmd_featurize(const RunConfig& c, const std::string& data, const std::string& columns, std::ostream& out) {
  if (c.window < 4) throw ConfigError("featurize needs --window >= 4");
  auto table = read_table(data, c.label);
  std::vector<std::size_t> cols;
  if (columns.empty()) {
    for (std::size_t i = 0; i < table.cols(); ++i)
      if (table.column(i).numeric) cols.push_back(i);
  } else {
    std::stringstream ss(columns);
    for (std::string name; std::getline(ss, name, ',');) {
      auto idx = table.find(name);
      if (!idx) throw ConfigError("unknown column '" + name + "'");
      if (!table.column(*idx).numeric) throw ConfigError("column '" + name + "' is not numeric");
      cols.push_back(*idx);
    }
  }
  std::vector<MomentAccumulator> acc(cols.size(), MomentAccumulator(c.window));
  out << std::setprecision(12) << "row";
  for (auto i : cols) {
    const auto& n = table.column(i).name;
    out << ',' << n << "_mean," << n << "_variance," << n << "_skewness," << n << "_kurtosis";
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) acc[k].push(table.number(r, cols[k]));
    if (acc.empty() || acc.front().count() < c.window) continue;
    out << r;
    for (const auto& a : acc) {
      auto m = a.query();
      out << ',' << m.mean << ',' << m.variance << ',' << m.skewness << ',' << m.kurtosis;
    }
    out << '\n';
  }
  return kExitInDistribution;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rule-based out-of-distribution detection"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string data, rules, baseline, out_path, columns, in_source, ood_source;
  std::vector<std::unique_ptr<Options>> options;

  auto common = [&](CLI::App* sub) {
    options.push_back(std::make_unique<Options>(sub, cfg));
    auto& o = *options.back();
    o.add("label", "--label", cfg.label, "Label column name");
    return &o;
  };
  auto sizes = [&](Options& o) {
    o.add("mode", "--mode", cfg.mode, "single | group");
    o.add("ns", "--ns", cfg.n_s, "Samples per split (n_s)");
    o.add("ntr", "--ntr", cfg.n_tr, "Training splits (N_tr)");
    o.add("nop", "--nop", cfg.n_op, "Operational splits (N_op); default 1 single, 10 group");
    o.add("seed", "--seed", cfg.seed, "Random seed");
    o.add("sigma_floor", "--sigma-floor", cfg.sigma_floor, "Lower bound on per-rule standard deviations");
    o.add("metrics", "--metrics", cfg.metrics, "Comma-separated metric roster (wmi,rbi,l1,l2)");
  };

  auto* induce = app.add_subcommand("induce", "Induce a reference ruleset from labeled data");
  {
    auto& o = *common(induce);
    induce->add_option("--data", data, "Labeled training CSV")->required();
    induce->add_option("--out", out_path, "Rules file (default stdout)");
    o.add("max_depth", "--max-depth", cfg.max_depth, "Tree depth limit");
    o.add("min_leaf", "--min-leaf", cfg.min_leaf, "Minimum samples per leaf");
  }
  auto* base = app.add_subcommand("baseline", "Build training baselines");
  {
    auto& o = *common(base);
    base->add_option("--data", data, "Training CSV")->required();
    base->add_option("--rules", rules, "Rules file")->required();
    base->add_option("--out,--baseline", out_path, "Baseline file to write")->required();
    sizes(o);
  }
  auto* detect = app.add_subcommand("detect", "Judge operational data against baselines");
  {
    auto& o = *common(detect);
    detect->add_option("--data", data, "Operational CSV")->required();
    detect->add_option("--rules", rules, "Rules file")->required();
    detect->add_option("--baseline", baseline, "Baseline file")->required();
    o.add("format", "--format", cfg.format, "json-document | csv");
  }
  auto* stream = app.add_subcommand("stream", "Sliding-window detection over a CSV stream");
  {
    auto& o = *common(stream);
    stream->add_option("--data", data, "Stream CSV file, or - for stdin");
    stream->add_option("--rules", rules, "Rules file")->required();
    stream->add_option("--baseline", baseline, "Baseline file")->required();
    o.add("ns", "--ns", cfg.window, "Window length (default: baseline n_s)");
    o.add("stride", "--stride", cfg.stride, "Detect every STRIDE samples");
    o.add("snapshot_stride", "--snapshot-stride", cfg.snapshot_stride, "Group mode: pushes between snapshots");
  }
  auto* eval = app.add_subcommand("eval", "Measure FPR/FNR over repeated runs");
  {
    auto& o = *common(eval);
    eval->add_option("--in-source", in_source, "In-distribution CSV or generator spec")->required();
    eval->add_option("--ood-source", ood_source, "Candidate OoD CSV or generator spec")->required();
    eval->add_option("--rules", rules, "Rules file (default: induce per repetition)");
    sizes(o);
    o.add("repetitions", "--repetitions", cfg.repetitions, "Repetitions");
    o.add("max_depth", "--max-depth", cfg.max_depth, "Tree depth limit");
    o.add("min_leaf", "--min-leaf", cfg.min_leaf, "Minimum samples per leaf");
    o.add("threads", "--threads", cfg.threads, "Worker threads (0: all cores)");
    eval->add_flag("--full-scale", cfg.full_scale, "Use 2500 repetitions");
  }
  auto* feat = app.add_subcommand("featurize", "Sliding-window mean/variance/skewness/kurtosis");
  {
    auto& o = *common(feat);
    feat->add_option("--data", data, "Input CSV")->required();
    feat->add_option("--columns", columns, "Comma-separated numeric columns (default all)");
    o.add("window", "--window", cfg.window, "Window length");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    for (const auto& o : options) o->apply_file();
    if (*induce) return cmd_induce(cfg, data, out_path, out, err);
    if (*base) return cmd_baseline(cfg, data, rules, out_path, out, err);
    if (*detect) return cmd_detect(cfg, data, rules, baseline, out, err);
    if (*stream) return cmd_stream(cfg, data, rules, baseline, in, out, err);
    if (*eval) return cmd_eval(cfg, in_source, ood_source, rules, out);
    if (*feat) return cmd_featurize(cfg, data, columns, out);
  } catch (const FingerprintMismatch& e) {
    err << "error: fingerprint mismatch: " << e.what() << '\n';
    return kExitFingerprint;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace rbood::cli
