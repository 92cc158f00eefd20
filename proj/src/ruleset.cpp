#include "rbood/ruleset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rbood/error.hpp"

namespace rbood {

bool Condition::holds(double x) const noexcept {
  switch (op) {
    case Comparison::Less: return x < threshold;
    case Comparison::LessEqual: return x <= threshold;
    case Comparison::Greater: return x > threshold;
    case Comparison::GreaterEqual: return x >= threshold;
    case Comparison::Equal: return x == threshold;
    case Comparison::InInterval: return interval && interval->contains(x);
  }
  return false;
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Ruleset::Ruleset(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    auto& r = rules_[i];
    if (r.premise.empty()) throw ConfigError("rule " + std::to_string(i + 1) + " has an empty premise");
    r.id = i + 1;
    for (const auto& c : r.premise) {
      if (c.op == Comparison::InInterval) {
        if (!c.interval || c.interval->lo > c.interval->hi)
          throw ConfigError("rule " + std::to_string(i + 1) + ": malformed interval on '" + c.feature + "'");
      }
      if (std::find(features_.begin(), features_.end(), c.feature) == features_.end())
        features_.push_back(c.feature);
    }
  }
}

std::uint64_t Ruleset::digest() const { return fnv1a(format_ruleset(*this)); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Number, String, Cmp, LBracket, RBracket, Comma, Colon, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class LineLexer {
 public:
  LineLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line_.size()) {
      char c = line_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '#') {
        break;
      } else if (c == '"') {
        std::size_t start = i++;
        std::string s;
        while (i < line_.size() && line_[i] != '"') s.push_back(line_[i++]);
        if (i >= line_.size()) fail("unterminated string", start);
        ++i;
        out.push_back({Tok::String, std::move(s), start + 1});
      } else if (c == '<' || c == '>' || c == '=') {
        std::size_t start = i;
        std::string op(1, c);
        if (i + 1 < line_.size() && line_[i + 1] == '=') op.push_back('=');
        if (op == "=") fail("expected '==' for equality", start);
        i += op.size();
        out.push_back({Tok::Cmp, std::move(op), start + 1});
      } else if (c == '[' || c == '(') {
        out.push_back({Tok::LBracket, std::string(1, c), ++i});
      } else if (c == ']' || c == ')') {
        out.push_back({Tok::RBracket, std::string(1, c), ++i});
      } else if (c == ',') {
        out.push_back({Tok::Comma, ",", ++i});
      } else if (c == ':') {
        out.push_back({Tok::Colon, ":", ++i});
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
        std::size_t start = i;
        ++i;
        while (i < line_.size() &&
               (std::isalnum(static_cast<unsigned char>(line_[i])) || line_[i] == '.' ||
                ((line_[i] == '-' || line_[i] == '+') && (line_[i - 1] == 'e' || line_[i - 1] == 'E'))))
          ++i;
        out.push_back({Tok::Number, std::string(line_.substr(start, i - start)), start + 1});
      } else if (ident_start(c)) {
        std::size_t start = i;
        while (i < line_.size() && ident_char(line_[i])) ++i;
        out.push_back({Tok::Ident, std::string(line_.substr(start, i - start)), start + 1});
      } else {
        fail(std::string("unexpected character '") + c + "'", i);
      }
    }
    out.push_back({Tok::End, "", line_.size() + 1});
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t pos) const {
    throw ParseError(what, line_no_, pos + 1);
  }
  std::string_view line_;
  std::size_t line_no_;
};

class RuleParser {
 public:
  RuleParser(std::vector<Token> toks, std::size_t line_no) : toks_(std::move(toks)), line_no_(line_no) {}

  /// Returns the rule and the explicit id prefix, if any.
  std::pair<Rule, std::optional<std::size_t>> parse() {
    std::optional<std::size_t> explicit_id;
    if (peek().kind == Tok::Number && toks_.size() > 1 && toks_[1].kind == Tok::Colon) {
      const auto& t = next();
      std::size_t id = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), id);
      if (ec != std::errc() || p != t.text.data() + t.text.size() || id == 0)
        fail("rule id must be a positive integer", t);
      explicit_id = id;
      next();
    }
    expect_keyword("if");
    Rule rule;
    if (is_keyword(peek(), "then")) fail("empty premise", peek());
    rule.premise.push_back(condition());
    while (is_keyword(peek(), "and")) {
      next();
      rule.premise.push_back(condition());
    }
    expect_keyword("then");
    const auto& label = next();
    if (label.kind != Tok::Ident && label.kind != Tok::Number && label.kind != Tok::String)
      fail("expected class label after 'then'", label);
    rule.consequence = label.text;
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after class label", peek());
    return {std::move(rule), explicit_id};
  }

 private:
  Condition condition() {
    const auto& feat = next();
    if (feat.kind != Tok::Ident || is_reserved(feat)) fail("expected feature name", feat);
    Condition c;
    c.feature = feat.text;
    const auto& op = next();
    if (op.kind == Tok::Cmp) {
      if (op.text == "<") c.op = Comparison::Less;
      else if (op.text == "<=") c.op = Comparison::LessEqual;
      else if (op.text == ">") c.op = Comparison::Greater;
      else if (op.text == ">=") c.op = Comparison::GreaterEqual;
      else c.op = Comparison::Equal;
      const auto& rhs = next();
      if (c.op == Comparison::Equal && rhs.kind == Tok::String) {
        c.category = rhs.text;
      } else {
        c.threshold = number(rhs);
      }
      return c;
    }
    if (is_keyword(op, "in")) {
      c.op = Comparison::InInterval;
      const auto& open = next();
      if (open.kind != Tok::LBracket && open.kind != Tok::RBracket) fail("malformed interval: expected '[' or '('", open);
      Interval iv;
      iv.lo_closed = open.text == "[";
      iv.lo = number(next());
      if (next().kind != Tok::Comma) fail("malformed interval: expected ','", toks_[pos_ - 1]);
      iv.hi = number(next());
      const auto& close = next();
      if (close.kind != Tok::RBracket && close.kind != Tok::LBracket) fail("malformed interval: expected ']' or ')'", close);
      iv.hi_closed = close.text == "]";
      if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi)
        fail("malformed interval: lower bound exceeds upper bound", open);
      c.interval = iv;
      return c;
    }
    fail("expected comparison operator or 'in'", op);
  }

  double number(const Token& t) {
    if (t.kind != Tok::Number && !(t.kind == Tok::Ident && (lower(t.text) == "inf" || lower(t.text) == "nan")))
      fail("expected number", t);
    auto v = parse_real(t.text);
    if (!v || std::isnan(*v)) fail("malformed number '" + t.text + "'", t);
    return *v;
  }

  static bool is_keyword(const Token& t, std::string_view kw) { return t.kind == Tok::Ident && lower(t.text) == kw; }
  static bool is_reserved(const Token& t) {
    auto l = lower(t.text);
    return l == "if" || l == "and" || l == "then" || l == "in";
  }

  void expect_keyword(std::string_view kw) {
    const auto& t = next();
    if (!is_keyword(t, kw)) fail("expected '" + std::string(kw) + "'", t);
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const auto& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& what, const Token& at) const { throw ParseError(what, line_no_, at.column); }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

bool bare_label(const std::string& s) {
  if (s.empty()) return false;
  if (ident_start(s[0])) {
    auto l = lower(s);
    if (l == "if" || l == "and" || l == "then" || l == "in") return false;
    return std::all_of(s.begin(), s.end(), ident_char);
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
  }) && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s[0] == '+' || s[0] == '.');
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

Ruleset parse_ruleset(std::string_view text) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    auto toks = LineLexer(line, line_no).run();
    if (toks.size() > 1) {
      auto [rule, id] = RuleParser(std::move(toks), line_no).parse();
      if (id) {
        if (*id != rules.size() + 1) {
          bool dup = *id <= rules.size();
          throw ParseError(dup ? "duplicate rule id " + std::to_string(*id)
                               : "rule id " + std::to_string(*id) + " out of sequence (expected " +
                                     std::to_string(rules.size() + 1) + ")",
                           line_no, 1);
        }
      }
      rules.push_back(std::move(rule));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return Ruleset(std::move(rules));
}

Ruleset read_ruleset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rules file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ruleset(ss.str());
}

std::string format_rule(const Rule& rule) {
  std::string out = "if ";
  for (std::size_t i = 0; i < rule.premise.size(); ++i) {
    const auto& c = rule.premise[i];
    if (i) out += " and ";
    out += c.feature;
    switch (c.op) {
      case Comparison::Less: out += " < "; break;
      case Comparison::LessEqual: out += " <= "; break;
      case Comparison::Greater: out += " > "; break;
      case Comparison::GreaterEqual: out += " >= "; break;
      case Comparison::Equal: out += " == "; break;
      case Comparison::InInterval: {
        const auto& iv = *c.interval;
        out += " in ";
        out += iv.lo_closed ? "[" : "(";
        out += format_number(iv.lo) + ", " + format_number(iv.hi);
        out += iv.hi_closed ? "]" : ")";
        continue;
      }
    }
    out += c.category ? quote(*c.category) : format_number(c.threshold);
  }
  out += " then ";
  out += bare_label(rule.consequence) ? rule.consequence : quote(rule.consequence);
  return out;
}

std::string format_ruleset(const Ruleset& ruleset) {
  std::string out;
  for (const auto& r : ruleset) {
    out += format_rule(r);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

bool evaluate_premise(const Rule& rule, const Record& sample) {
  for (const auto& c : rule.premise) {
    auto it = sample.find(c.feature);
    if (it == sample.end()) throw EvaluationError("missing feature '" + c.feature + "' in sample");
    if (c.category) {
      const auto* s = std::get_if<std::string>(&it->second);
      if (!s) throw EvaluationError("feature '" + c.feature + "' is numeric; rule compares it to a category");
      if (*s != *c.category) return false;
      continue;
    }
    const auto* x = std::get_if<double>(&it->second);
    if (!x) throw EvaluationError("non-numeric value for feature '" + c.feature + "'");
    if (!c.holds(*x)) return false;
  }
  return true;
}

HitMask ruleset_hits(const Ruleset& ruleset, const Record& sample) {
  HitMask mask(ruleset.size());
  for (std::size_t i = 0; i < ruleset.size(); ++i) mask[i] = evaluate_premise(ruleset[i], sample);
  return mask;
}

BoundRuleset::BoundRuleset(const Ruleset& ruleset, const FeatureTable& table) {
  rules_.reserve(ruleset.size());
  for (const auto& r : ruleset) {
    std::vector<BoundCondition> bound;
    bound.reserve(r.premise.size());
    for (const auto& c : r.premise) {
      auto idx = table.find(c.feature);
      if (!idx) throw EvaluationError("missing feature '" + c.feature + "' in data");
      const auto& col = table.column(*idx);
      if (c.category && col.numeric)
        throw EvaluationError("feature '" + c.feature + "' is numeric; rule compares it to a category");
      if (!c.category && !col.numeric) throw EvaluationError("non-numeric value for feature '" + c.feature + "'");
      bound.push_back({&c, &col});
    }
    rules_.push_back(std::move(bound));
  }
}

bool BoundRuleset::hits(std::size_t rule, std::size_t row) const {
  for (const auto& b : rules_[rule]) {
    if (b.condition->category) {
      if (b.column->text[row] != *b.condition->category) return false;
    } else if (!b.condition->holds(b.column->numbers[row])) {
      return false;
    }
  }
  return true;
}

void BoundRuleset::hits(std::size_t row, HitMask& mask) const {
  mask.assign(rules_.size(), false);
  for (std::size_t i = 0; i < rules_.size(); ++i) mask[i] = hits(i, row);
}

}  // namespace rbood
