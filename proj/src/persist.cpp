#include "rbood/persist.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rbood/error.hpp"

namespace rbood {

using nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormat = "rbood-baseline/1";

ordered_json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number(const ordered_json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw DataError("malformed number '" + s + "' in baseline document");
  }
  return j.get<double>();
}

ordered_json interval(const ClosedInterval& i) { return ordered_json{{"min", number(i.min)}, {"max", number(i.max)}}; }

ClosedInterval interval(const ordered_json& j) { return {number(j.at("min")), number(j.at("max"))}; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t pos = 0;
  auto v = std::stoull(s, &pos, 16);
  if (pos != s.size()) throw DataError("malformed digest '" + s + "'");
  return v;
}

ordered_json config_json(const BaselineConfig& c) {
  ordered_json roster = ordered_json::array();
  for (auto m : c.effective_roster()) roster.push_back(std::string(to_string(m)));
  return ordered_json{{"mode", std::string(to_string(c.mode))},
                      {"n_s", c.n_s},
                      {"n_tr", c.n_tr},
                      {"n_op", c.n_op},
                      {"k", c.mode == Mode::Group ? ordered_json(c.k()) : ordered_json(nullptr)},
                      {"seed", c.seed},
                      {"sigma_floor", c.sigma_floor},
                      {"roster", roster},
                      {"ruleset_digest", hex64(c.ruleset_digest)}};
}

BaselineConfig config_from_json(const ordered_json& j) {
  BaselineConfig c;
  c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.n_s = j.at("n_s").get<std::size_t>();
  c.n_tr = j.at("n_tr").get<std::size_t>();
  c.n_op = j.at("n_op").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.sigma_floor = j.at("sigma_floor").get<double>();
  std::vector<Metric> roster;
  for (const auto& m : j.at("roster")) roster.push_back(metric_from_string(m.get<std::string>()));
  if (roster != default_roster(c.mode)) c.roster = std::move(roster);
  c.ruleset_digest = parse_hex64(j.at("ruleset_digest").get<std::string>());
  return c;
}

}  // namespace

std::string baselines_to_text(const BaselineBundle& bundle) {
  const auto& b = bundle.baselines;
  ordered_json intervals = ordered_json::object();
  if (b.wmi) intervals["wmi"] = interval(*b.wmi);
  if (b.rbi) intervals["rbi"] = interval(*b.rbi);
  intervals["l1"] = interval(b.l1);
  intervals["l2"] = interval(b.l2);

  ordered_json columns = ordered_json::array();
  for (const auto& h : bundle.training.training)
    columns.push_back(ordered_json{{"split_size", h.split_size()}, {"counts", h.counts()}});

  ordered_json doc{{"format", kFormat},
                   {"fingerprint", b.fingerprint},
                   {"config", config_json(b.config)},
                   {"intervals", intervals},
                   {"training", ordered_json{{"ruleset_digest", hex64(bundle.training.ruleset_digest)},
                                             {"columns", columns}}}};
  return doc.dump(2) + "\n";
}

BaselineBundle baselines_from_text(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("baseline document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw DataError("unsupported baseline format");
    BaselineBundle out;
    auto& b = out.baselines;
    b.fingerprint = doc.at("fingerprint").get<std::string>();
    b.config = config_from_json(doc.at("config"));
    const auto& iv = doc.at("intervals");
    if (iv.contains("wmi")) b.wmi = interval(iv.at("wmi"));
    if (iv.contains("rbi")) b.rbi = interval(iv.at("rbi"));
    b.l1 = interval(iv.at("l1"));
    b.l2 = interval(iv.at("l2"));
    const auto& tr = doc.at("training");
    out.training.ruleset_digest = parse_hex64(tr.at("ruleset_digest").get<std::string>());
    for (const auto& col : tr.at("columns"))
      out.training.training.emplace_back(col.at("counts").get<std::vector<std::int64_t>>(),
                                         col.at("split_size").get<std::int64_t>(), Origin::Training);
    return out;
  } catch (const ordered_json::exception& e) {
    throw DataError(std::string("malformed baseline document: ") + e.what());
  }
}

void save_baselines(const std::string& path, const BaselineBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << baselines_to_text(bundle);
}

BaselineBundle load_baselines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open baseline file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return baselines_from_text(ss.str());
}

std::string report_to_text(const DetectionReport& report, const BaselineConfig& config) {
  ordered_json metrics = ordered_json::object();
  for (const auto& r : report.per_metric) {
    ordered_json values = ordered_json::array();
    for (double v : r.values) values.push_back(number(v));
    metrics[std::string(to_string(r.metric))] =
        ordered_json{{"values", values},
                     {"baseline", interval(r.baseline)},
                     {"votes_out", r.votes_out},
                     {"votes_total", r.votes_total},
                     {"flag", r.flag ? "on" : "off"},
                     {"normalized_distance", number(r.normalized_distance)}};
  }
  ordered_json doc{{"mode", std::string(to_string(report.mode))},
                   {"verdict", std::string(to_string(report.verdict))},
                   {"per_metric", metrics},
                   {"config", config_json(config)}};
  return doc.dump(2) + "\n";
}

}  // namespace rbood
