#include "rbood/table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rbood/error.hpp"

namespace rbood {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

FeatureTable::FeatureTable(std::vector<std::string> names) {
  columns_.reserve(names.size());
  for (auto& n : names) columns_.push_back(Column{std::move(n), true, {}, {}});
}

std::vector<std::string> FeatureTable::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

std::optional<std::size_t> FeatureTable::find(std::string_view name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c)
    if (columns_[c].name == name) return c;
  return std::nullopt;
}

void FeatureTable::add_row(std::span<const double> values) {
  if (labeled_) throw DataError("table is labeled; a label is required for every row");
  if (values.size() != columns_.size())
    throw DataError("row has " + std::to_string(values.size()) + " values, table has " +
                    std::to_string(columns_.size()) + " columns");
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (!columns_[c].numeric) throw DataError("add_row on categorical column '" + columns_[c].name + "'");
    columns_[c].numbers.push_back(values[c]);
  }
  ++rows_;
}

void FeatureTable::add_row(std::span<const double> values, std::string label) {
  if (rows_ > 0 && !labeled_) throw DataError("table is unlabeled; cannot add a labeled row");
  labeled_ = true;
  if (values.size() != columns_.size())
    throw DataError("row has " + std::to_string(values.size()) + " values, table has " +
                    std::to_string(columns_.size()) + " columns");
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (!columns_[c].numeric) throw DataError("add_row on categorical column '" + columns_[c].name + "'");
    columns_[c].numbers.push_back(values[c]);
  }
  labels_.push_back(std::move(label));
  ++rows_;
}

Record FeatureTable::record(std::size_t row) const {
  if (row >= rows_) throw DataError("row index out of range");
  Record r;
  for (const auto& c : columns_) {
    if (c.numeric)
      r.emplace(c.name, c.numbers[row]);
    else
      r.emplace(c.name, c.text[row]);
  }
  return r;
}

FeatureTable FeatureTable::select(std::span<const std::size_t> rows) const {
  FeatureTable out;
  out.columns_.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column nc{c.name, c.numeric, {}, {}};
    if (c.numeric) {
      nc.numbers.reserve(rows.size());
      for (auto r : rows) nc.numbers.push_back(c.numbers.at(r));
    } else {
      nc.text.reserve(rows.size());
      for (auto r : rows) nc.text.push_back(c.text.at(r));
    }
    out.columns_.push_back(std::move(nc));
  }
  out.labeled_ = labeled_;
  if (labeled_) {
    out.labels_.reserve(rows.size());
    for (auto r : rows) out.labels_.push_back(labels_.at(r));
  }
  out.rows_ = rows.size();
  return out;
}

FeatureTable FeatureTable::from_columns(std::vector<Column> columns, std::vector<std::string> labels) {
  FeatureTable t;
  std::size_t n = 0;
  bool first = true;
  for (const auto& c : columns) {
    std::size_t len = c.numeric ? c.numbers.size() : c.text.size();
    if (first) {
      n = len;
      first = false;
    } else if (len != n) {
      throw DataError("column '" + c.name + "' has " + std::to_string(len) + " rows, expected " + std::to_string(n));
    }
  }
  if (!labels.empty() && labels.size() != n && !columns.empty())
    throw DataError("label count does not match row count");
  if (columns.empty()) n = labels.size();
  t.columns_ = std::move(columns);
  t.labeled_ = !labels.empty();
  t.labels_ = std::move(labels);
  t.rows_ = n;
  return t;
}

std::optional<double> parse_real(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

FeatureTable read_csv(std::istream& in, const std::optional<std::string>& label_column) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError("CSV input has no header row");

  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) throw ConfigError("label column '" + *label_column + "' not found in CSV header");
    label_idx = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<std::string>> cells(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c].empty())
        throw DataError("CSV line " + std::to_string(line_no) + ": missing value for '" + header[c] + "'");
      cells[c].push_back(std::move(fields[c]));
    }
  }

  std::vector<FeatureTable::Column> columns;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (label_idx && c == *label_idx) {
      labels = std::move(cells[c]);
      continue;
    }
    FeatureTable::Column col{header[c], true, {}, {}};
    col.numbers.reserve(cells[c].size());
    for (const auto& cell : cells[c]) {
      auto v = parse_real(cell);
      if (!v) {
        col.numeric = false;
        col.numbers.clear();
        break;
      }
      col.numbers.push_back(*v);
    }
    if (!col.numeric) col.text = std::move(cells[c]);
    columns.push_back(std::move(col));
  }
  auto t = FeatureTable::from_columns(std::move(columns), std::move(labels));
  return t;
}

FeatureTable read_csv_file(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, label_column);
}

void write_csv(std::ostream& out, const FeatureTable& table, const std::string& label_column) {
  std::ostringstream buf;
  buf.precision(17);
  for (std::size_t c = 0; c < table.cols(); ++c) buf << (c ? "," : "") << table.column(c).name;
  if (table.has_labels()) buf << (table.cols() ? "," : "") << label_column;
  buf << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const auto& col = table.column(c);
      if (c) buf << ',';
      if (col.numeric)
        buf << col.numbers[r];
      else
        buf << col.text[r];
    }
    if (table.has_labels()) buf << (table.cols() ? "," : "") << table.label(r);
    buf << '\n';
  }
  out << buf.str();
}

}  // namespace rbood
