#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lab/fit.hpp"

namespace lab::cli {

using Cell = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Cell>;
using Meta = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip text for doubles; integers and strings verbatim.
std::string format_cell(const Cell& c);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  Meta header;  // config hash, code version, schema
  Meta footer;  // fitted slopes, wall time

  /// Appends a row; throws InputError if its width differs from columns.
  void add(Row row);
  std::size_t column_index(const std::string& name) const;
  /// Numeric column; string cells throw InputError.
  std::vector<double> column(const std::string& name) const;
  std::string meta(const std::string& key) const;
};

fit::SlopeFit fit_slope(const ResultTable& table, const std::string& x_col,
                        const std::string& y_col, int drop_smallest = 0);

/// Writes a table as it grows: header block and column names on open, rows as
/// they arrive, footer block on close. Lines starting with '#' are metadata;
/// everything else is the body. With `tsv`, a tab-separated copy is written
/// alongside at the path with its extension replaced by .tsv.
class CsvSink {
 public:
  CsvSink(const std::string& path, const std::vector<std::string>& columns, const Meta& header,
          bool tsv);
  void write(const Row& row);
  void close(const Meta& footer);

 private:
  void emit(std::ofstream& f, char sep, const std::vector<std::string>& cells);

  std::ofstream csv_;
  std::ofstream tsv_;
  std::size_t width_;
};

/// Path with its extension replaced by .tsv.
std::string tsv_path(const std::string& csv_path);

/// Body lines (non-'#') of a CSV file.
std::string read_body(const std::string& path);

}  // namespace lab::cli
