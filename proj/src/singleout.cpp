#include "mia/singleout.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace mia {

QuasiIdentifierSet qi_from_names(const Dataset& d, const std::vector<std::string>& names) {
  QuasiIdentifierSet q;
  for (const std::string& name : names) {
    auto idx = d.column_index(name);
    if (!idx) throw std::runtime_error("quasi-identifier column not found: " + name);
    if (*idx == d.label_column())
      throw std::runtime_error("label column cannot be a quasi-identifier");
    q.qi_columns.push_back(*idx);
  }
  return q;
}

SingleOutReport detect_single_outs(const Dataset& d, const QuasiIdentifierSet& q) {
  if (q.qi_columns.empty()) throw std::runtime_error("empty quasi-identifier set");
  for (std::size_t c : q.qi_columns) {
    if (c >= d.n_columns()) throw std::runtime_error("quasi-identifier column out of range");
    if (c == d.label_column())
      throw std::runtime_error("label column cannot be a quasi-identifier");
  }

  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  groups.reserve(d.n_rows());
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    std::string key;
    for (std::size_t c : q.qi_columns) {
      key += d.cell_text(r, c);
      key.push_back('\x1f');
    }
    groups[key].push_back(r);
  }

  SingleOutReport report;
  for (const auto& [key, rows] : groups) {
    report.equivalence_class_sizes[key] = rows.size();
    if (rows.size() == 1) report.single_out_indices.push_back(rows.front());
  }
  std::sort(report.single_out_indices.begin(), report.single_out_indices.end());
  return report;
}

}  // namespace mia
