#include "lab/table.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "lab/error.hpp"

namespace lab::cli {

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  const double v = std::get<double>(c);
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ResultTable::add(Row row) {
  if (row.size() != columns.size())
    throw InputError("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                     std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InputError("ResultTable: no column '" + name + "'");
}

std::vector<double> ResultTable::column(const std::string& name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (const auto* d = std::get_if<double>(&r[k])) out.push_back(*d);
    else if (const auto* i = std::get_if<std::int64_t>(&r[k])) out.push_back(static_cast<double>(*i));
    else throw InputError("ResultTable: column '" + name + "' is not numeric");
  }
  return out;
}

std::string ResultTable::meta(const std::string& key) const {
  for (const Meta* m : {&header, &footer})
    for (const auto& [k, v] : *m)
      if (k == key) return v;
  throw InputError("ResultTable: no metadata '" + key + "'");
}

fit::SlopeFit fit_slope(const ResultTable& table, const std::string& x_col,
                        const std::string& y_col, int drop_smallest) {
  const auto x = table.column(x_col);
  const auto y = table.column(y_col);
  return fit::fit_slope(x, y, drop_smallest);
}

std::string tsv_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".tsv").string();
}

CsvSink::CsvSink(const std::string& path, const std::vector<std::string>& columns,
                 const Meta& header, bool tsv)
    : width_(columns.size()) {
  csv_.open(path, std::ios::binary | std::ios::trunc);
  if (!csv_) throw InputError("cannot open output '" + path + "'");
  if (tsv) {
    tsv_.open(tsv_path(path), std::ios::binary | std::ios::trunc);
    if (!tsv_) throw InputError("cannot open output '" + tsv_path(path) + "'");
  }
  for (const auto& [k, v] : header) {
    csv_ << "# " << k << ": " << v << '\n';
    if (tsv_.is_open()) tsv_ << "# " << k << ": " << v << '\n';
  }
  emit(csv_, ',', columns);
  if (tsv_.is_open()) emit(tsv_, '\t', columns);
}

void CsvSink::emit(std::ofstream& f, char sep, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? std::string(1, sep) : "") << cells[i];
  f << '\n';
  f.flush();
}

void CsvSink::write(const Row& row) {
  if (row.size() != width_) throw InputError("CsvSink: row width mismatch");
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (const auto& c : row) cells.push_back(format_cell(c));
  emit(csv_, ',', cells);
  if (tsv_.is_open()) emit(tsv_, '\t', cells);
}

void CsvSink::close(const Meta& footer) {
  for (const auto& [k, v] : footer) {
    csv_ << "# " << k << ": " << v << '\n';
    if (tsv_.is_open()) tsv_ << "# " << k << ": " << v << '\n';
  }
  csv_.close();
  if (tsv_.is_open()) tsv_.close();
}

std::string read_body(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  std::string line, body;
  while (std::getline(f, line))
    if (line.empty() || line.front() != '#') body += line + '\n';
  return body;
}

}  // namespace lab::cli
