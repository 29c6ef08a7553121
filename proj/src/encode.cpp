#include "mia/encode.hpp"

#include <cmath>
#include <stdexcept>

namespace mia {

Encoder Encoder::fit(const Dataset& d, std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::runtime_error("encoder fit on empty row set");
  Encoder e;
  e.label_col_ = d.label_column();
  e.n_classes_ = d.n_classes();
  e.stats_.resize(d.n_columns());
  std::size_t out = 0;
  for (std::size_t c = 0; c < d.n_columns(); ++c) {
    if (c == d.label_column()) continue;
    const Column& col = d.column(c);
    ColumnExpansion exp;
    exp.input_col = c;
    exp.out_start = out;
    if (col.schema.kind == ColumnKind::numeric) {
      double sum = 0.0;
      for (std::size_t r : rows) sum += col.num[r];
      const double mean = sum / static_cast<double>(rows.size());
      double ss = 0.0;
      for (std::size_t r : rows) {
        const double dlt = col.num[r] - mean;
        ss += dlt * dlt;
      }
      const double var = ss / static_cast<double>(rows.size());
      NumericStats& st = e.stats_[c];
      st.mean = mean;
      if (var <= 0.0) {
        st.std = 1.0;
        st.constant = true;
        e.warnings_.push_back("zero-variance numeric column '" + col.schema.name +
                              "' standardized to zeros");
      } else {
        st.std = std::sqrt(var);
      }
      exp.out_len = 1;
      exp.one_hot = false;
    } else {
      exp.out_len = col.schema.categories.size();
      exp.one_hot = true;
    }
    out += exp.out_len;
    e.expansions_.push_back(exp);
  }
  e.n_out_cols_ = out;
  return e;
}

void Encoder::encode_row(const Dataset& d, std::size_t row, double* out) const {
  for (const ColumnExpansion& exp : expansions_) {
    const Column& col = d.column(exp.input_col);
    if (exp.one_hot) {
      for (std::size_t k = 0; k < exp.out_len; ++k) out[exp.out_start + k] = 0.0;
      const int code = col.cat[row];
      // values outside the fitted categories map to the all-zeros block
      if (code >= 0 && static_cast<std::size_t>(code) < exp.out_len)
        out[exp.out_start + code] = 1.0;
    } else {
      const NumericStats& st = stats_[exp.input_col];
      out[exp.out_start] = st.constant ? 0.0 : (col.num[row] - st.mean) / st.std;
    }
  }
}

std::vector<double> Encoder::encode_row(const Dataset& d, std::size_t row) const {
  std::vector<double> out(n_out_cols_);
  encode_row(d, row, out.data());
  return out;
}

nlohmann::json Encoder::to_json() const {
  nlohmann::json stats = nlohmann::json::array();
  for (const NumericStats& s : stats_)
    stats.push_back({{"mean", s.mean}, {"std", s.std}, {"constant", s.constant}});
  nlohmann::json exps = nlohmann::json::array();
  for (const ColumnExpansion& e : expansions_)
    exps.push_back({{"input_col", e.input_col},
                    {"out_start", e.out_start},
                    {"out_len", e.out_len},
                    {"one_hot", e.one_hot}});
  return {{"stats", stats},
          {"expansions", exps},
          {"n_out_cols", n_out_cols_},
          {"label_col", label_col_},
          {"n_classes", n_classes_}};
}

Encoder Encoder::from_json(const nlohmann::json& j) {
  Encoder e;
  for (const auto& sj : j.at("stats")) {
    NumericStats s;
    s.mean = sj.at("mean").get<double>();
    s.std = sj.at("std").get<double>();
    s.constant = sj.at("constant").get<bool>();
    e.stats_.push_back(s);
  }
  for (const auto& ej : j.at("expansions")) {
    ColumnExpansion exp;
    exp.input_col = ej.at("input_col").get<std::size_t>();
    exp.out_start = ej.at("out_start").get<std::size_t>();
    exp.out_len = ej.at("out_len").get<std::size_t>();
    exp.one_hot = ej.at("one_hot").get<bool>();
    e.expansions_.push_back(exp);
  }
  e.n_out_cols_ = j.at("n_out_cols").get<std::size_t>();
  e.label_col_ = j.at("label_col").get<std::size_t>();
  e.n_classes_ = j.at("n_classes").get<int>();
  return e;
}

EncodedMatrix Encoder::apply(const Dataset& d, std::span<const std::size_t> rows) const {
  EncodedMatrix m;
  m.n_rows = rows.size();
  m.n_cols = n_out_cols_;
  m.x.resize(m.n_rows * m.n_cols);
  m.y.reserve(m.n_rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    encode_row(d, rows[i], m.x.data() + i * m.n_cols);
    m.y.push_back(d.label(rows[i]));
  }
  return m;
}

}  // namespace mia
