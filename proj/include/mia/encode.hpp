#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mia/dataset.hpp"

namespace mia {

struct EncodedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> x;  // row-major
  std::vector<int> y;

  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * n_cols, n_cols};
  }
};

// Which output columns a given input column expanded to.
struct ColumnExpansion {
  std::size_t input_col = 0;
  std::size_t out_start = 0;
  std::size_t out_len = 0;
  bool one_hot = false;
};

// One-hot for categorical columns, z-score standardization for numeric ones.
// Standardization statistics come only from the rows passed to fit(); the
// fitted encoder is then reapplied to any other split of the same schema.
class Encoder {
 public:
  static Encoder fit(const Dataset& d, std::span<const std::size_t> rows);

  EncodedMatrix apply(const Dataset& d, std::span<const std::size_t> rows) const;
  void encode_row(const Dataset& d, std::size_t row, double* out) const;
  std::vector<double> encode_row(const Dataset& d, std::size_t row) const;

  std::size_t n_out_cols() const { return n_out_cols_; }
  const std::vector<ColumnExpansion>& expansions() const { return expansions_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int n_classes() const { return n_classes_; }

  nlohmann::json to_json() const;
  static Encoder from_json(const nlohmann::json& j);

 private:
  struct NumericStats {
    double mean = 0.0;
    double std = 1.0;
    bool constant = false;
  };
  std::vector<NumericStats> stats_;  // indexed by input column (unused for categorical)
  std::vector<ColumnExpansion> expansions_;
  std::vector<std::string> warnings_;
  std::size_t n_out_cols_ = 0;
  std::size_t label_col_ = 0;
  int n_classes_ = 0;
};

}  // namespace mia
