#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mia/dataset.hpp"

namespace mia {

struct QuasiIdentifierSet {
  std::vector<std::size_t> qi_columns;
};

QuasiIdentifierSet qi_from_names(const Dataset& d, const std::vector<std::string>& names);

// Equivalence classes over exact QI-tuple equality. A record is a single-out
// when its class frequency f_k is 1.
struct SingleOutReport {
  std::map<std::string, std::size_t> equivalence_class_sizes;  // QI tuple key -> f_k
  std::vector<std::size_t> single_out_indices;
};

SingleOutReport detect_single_outs(const Dataset& d, const QuasiIdentifierSet& q);

}  // namespace mia
