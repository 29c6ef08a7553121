#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mia {

enum class ColumnKind { numeric, categorical };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> categories;  // categorical only, sorted
};

// Columnar storage: numeric columns hold doubles, categorical columns hold
// indices into schema.categories (-1 for values outside the schema).
struct Column {
  ColumnSchema schema;
  std::vector<double> num;
  std::vector<int> cat;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::vector<Column> columns, std::size_t label_col,
          std::size_t dropped_rows = 0);

  const std::string& name() const { return name_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }
  std::size_t n_features() const { return columns_.size() - 1; }
  std::size_t label_column() const { return label_col_; }
  int n_classes() const { return n_classes_; }
  std::size_t dropped_rows() const { return dropped_rows_; }

  const Column& column(std::size_t c) const { return columns_[c]; }
  const std::vector<Column>& columns() const { return columns_; }

  // class id in {0..n_classes-1}
  int label(std::size_t row) const { return columns_[label_col_].cat[row]; }
  std::vector<int> labels(std::span<const std::size_t> rows) const;
  std::vector<int> labels() const;

  // Canonical text form of one cell, used for equivalence-class keys.
  std::string cell_text(std::size_t row, std::size_t col) const;

  std::optional<std::size_t> column_index(const std::string& name) const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::size_t label_col_ = 0;
  int n_classes_ = 0;
  std::size_t n_rows_ = 0;
  std::size_t dropped_rows_ = 0;
};

struct LoadOptions {
  std::string label;                                   // required: label column name
  std::map<std::string, ColumnKind> kind_overrides;    // per-column schema hints
  std::string dataset_name;                            // defaults to file stem
};

// Parses a header CSV into a Dataset. Column kinds are inferred (numeric when
// every non-empty cell parses as a finite double) unless overridden. Rows with
// empty cells are dropped and counted; ragged rows are an error.
Dataset load_csv(const std::string& path, const LoadOptions& opts);

// Same parser over an in-memory buffer (tests, generated data).
Dataset load_csv_text(const std::string& text, const LoadOptions& opts, const std::string& name);

void write_csv(const Dataset& d, const std::string& path);

}  // namespace mia
