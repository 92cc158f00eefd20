#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rbood {

/// A single feature value: numeric, or a string for categorical columns.
using Value = std::variant<double, std::string>;

/// One sample addressed by feature name.
using Record = std::map<std::string, Value, std::less<>>;

/// Column-major table of samples with an optional label per row.
class FeatureTable {
 public:
  struct Column {
    std::string name;
    bool numeric = true;
    std::vector<double> numbers;     // used when numeric
    std::vector<std::string> text;   // used otherwise
  };

  FeatureTable() = default;
  /// Empty all-numeric table with the given columns.
  explicit FeatureTable(std::vector<std::string> names);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  bool has_labels() const noexcept { return labeled_; }

  std::vector<std::string> names() const;
  std::optional<std::size_t> find(std::string_view name) const;
  const Column& column(std::size_t c) const { return columns_.at(c); }

  double number(std::size_t row, std::size_t col) const { return columns_[col].numbers[row]; }
  const std::string& label(std::size_t row) const { return labels_.at(row); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Appends a row to an all-numeric table.
  void add_row(std::span<const double> values);
  void add_row(std::span<const double> values, std::string label);

  Record record(std::size_t row) const;
  /// Copy of the given rows, in the given order.
  FeatureTable select(std::span<const std::size_t> rows) const;

  /// Builds a table from already-typed columns (all of equal length).
  static FeatureTable from_columns(std::vector<Column> columns, std::vector<std::string> labels = {});

 private:
  std::vector<Column> columns_;
  std::vector<std::string> labels_;
  std::size_t rows_ = 0;
  bool labeled_ = false;
};

/// Reads CSV with a header row. A column whose every cell parses as a decimal real is numeric;
/// any other column is categorical. Empty cells are an error. When label_column is given the
/// column is moved out of the features into the row labels.
FeatureTable read_csv(std::istream& in, const std::optional<std::string>& label_column = std::nullopt);
FeatureTable read_csv_file(const std::string& path, const std::optional<std::string>& label_column = std::nullopt);

void write_csv(std::ostream& out, const FeatureTable& table, const std::string& label_column = "label");

/// Splits one CSV line into trimmed fields. Double quotes group commas.
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a decimal real; nullopt if the whole token is not a number.
std::optional<double> parse_real(std::string_view token);

}  // namespace rbood
