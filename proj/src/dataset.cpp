#include "mia/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mia {

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  if (b == e) return false;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// RFC-4180-ish: quoted fields, doubled quotes, commas inside quotes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (in_quotes) throw std::runtime_error("unterminated quote on line " + std::to_string(line_no));
  out.push_back(cur);
  return out;
}

}  // namespace

Dataset::Dataset(std::string name, std::vector<Column> columns, std::size_t label_col,
                 std::size_t dropped_rows)
    : name_(std::move(name)),
      columns_(std::move(columns)),
      label_col_(label_col),
      dropped_rows_(dropped_rows) {
  if (columns_.empty()) throw std::runtime_error("dataset has no columns");
  if (label_col_ >= columns_.size()) throw std::runtime_error("label column out of range");
  const Column& lc = columns_[label_col_];
  if (lc.schema.kind != ColumnKind::categorical)
    throw std::runtime_error("label column must be categorical");
  n_rows_ = lc.cat.size();
  if (n_rows_ == 0) throw std::runtime_error("dataset has no rows");
  n_classes_ = static_cast<int>(lc.schema.categories.size());
  std::set<std::string> seen;
  for (const Column& c : columns_) {
    if (!seen.insert(c.schema.name).second)
      throw std::runtime_error("duplicate column name: " + c.schema.name);
    std::size_t len = c.schema.kind == ColumnKind::numeric ? c.num.size() : c.cat.size();
    if (len != n_rows_) throw std::runtime_error("column length mismatch: " + c.schema.name);
  }
  for (int v : lc.cat)
    if (v < 0 || v >= n_classes_) throw std::runtime_error("label value out of range");
}

std::vector<int> Dataset::labels(std::span<const std::size_t> rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(label(r));
  return out;
}

std::vector<int> Dataset::labels() const {
  return columns_[label_col_].cat;
}

std::string Dataset::cell_text(std::size_t row, std::size_t col) const {
  const Column& c = columns_[col];
  if (c.schema.kind == ColumnKind::numeric) return format_double(c.num[row]);
  int code = c.cat[row];
  return code >= 0 ? c.schema.categories[code] : std::string("?");
}

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].schema.name == name) return i;
  return std::nullopt;
}

namespace {

Dataset build_from_cells(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& raw_rows,
                         std::size_t dropped, const LoadOptions& opts, const std::string& name) {
  const std::size_t n_cols = header.size();
  std::size_t label_col = n_cols;
  for (std::size_t i = 0; i < n_cols; ++i)
    if (header[i] == opts.label) label_col = i;
  if (label_col == n_cols)
    throw std::runtime_error("label column '" + opts.label + "' not found in header");

  // Kind inference. The label column is always categorical so that labels
  // become contiguous class ids.
  std::vector<ColumnKind> kinds(n_cols, ColumnKind::numeric);
  for (std::size_t c = 0; c < n_cols; ++c) {
    auto it = opts.kind_overrides.find(header[c]);
    if (it != opts.kind_overrides.end()) {
      kinds[c] = it->second;
      continue;
    }
    double tmp;
    for (const auto& row : raw_rows) {
      if (!parse_double(row[c], tmp)) {
        kinds[c] = ColumnKind::categorical;
        break;
      }
    }
  }
  kinds[label_col] = ColumnKind::categorical;

  std::vector<Column> cols(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    cols[c].schema.name = header[c];
    cols[c].schema.kind = kinds[c];
    if (kinds[c] == ColumnKind::categorical) {
      std::set<std::string> values;
      for (const auto& row : raw_rows) values.insert(row[c]);
      cols[c].schema.categories.assign(values.begin(), values.end());
    }
  }

  for (const auto& row : raw_rows) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (kinds[c] == ColumnKind::numeric) {
        double v;
        if (!parse_double(row[c], v))
          throw std::runtime_error("unparseable numeric cell '" + row[c] + "' in column " +
                                   header[c]);
        cols[c].num.push_back(v);
      } else {
        const auto& cats = cols[c].schema.categories;
        auto it = std::lower_bound(cats.begin(), cats.end(), row[c]);
        cols[c].cat.push_back(static_cast<int>(it - cats.begin()));
      }
    }
  }
  return Dataset(name, std::move(cols), label_col, dropped);
}

Dataset parse_csv_stream(std::istream& in, const LoadOptions& opts, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + name);
  std::vector<std::string> header = split_csv_line(line, 1);
  const std::size_t n_cols = header.size();

  std::vector<std::vector<std::string>> rows;
  std::size_t dropped = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line, line_no);
    if (cells.size() != n_cols)
      throw std::runtime_error("row " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(n_cols));
    bool missing = false;
    for (const auto& cell : cells)
      if (cell.empty()) missing = true;
    if (missing) {
      ++dropped;  // no imputation: incomplete rows are dropped and counted
      continue;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw std::runtime_error("CSV has no complete data rows: " + name);
  return build_from_cells(header, rows, dropped, opts, name);
}

}  // namespace

Dataset load_csv(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string name = opts.dataset_name;
  if (name.empty()) {
    auto slash = path.find_last_of('/');
    name = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
  }
  return parse_csv_stream(in, opts, name);
}

Dataset load_csv_text(const std::string& text, const LoadOptions& opts, const std::string& name) {
  std::istringstream in(text);
  return parse_csv_stream(in, opts, name);
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (std::size_t c = 0; c < d.n_columns(); ++c) {
    if (c) out << ',';
    out << d.column(c).schema.name;
  }
  out << '\n';
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    for (std::size_t c = 0; c < d.n_columns(); ++c) {
      if (c) out << ',';
      out << d.cell_text(r, c);
    }
    out << '\n';
  }
}

}  // namespace mia
