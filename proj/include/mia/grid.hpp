#pragma once

#include "mia/model.hpp"

namespace mia {

enum class GridRegime { weak, defense };

// One named hyperparameter axis; the cartesian product is enumerated
// row-major in axis order, which also defines the tie-break order.
struct GridAxis {
  std::string name;
  std::vector<nlohmann::json> values;
};

struct HyperGrid {
  ModelKind kind;
  GridRegime regime;
  std::vector<GridAxis> axes;

  std::size_t size() const;
  nlohmann::json combo(std::size_t index) const;
};

HyperGrid make_grid(ModelKind kind, GridRegime regime);

struct GridSearchResult {
  ModelSpec best_spec;
  GeneralizationReport report;
  TrainedModel model;
  std::size_t n_candidates = 0;
};

// Exhaustive search: best validation accuracy, ties broken by smaller
// generalization gap, then by grid order.
GridSearchResult grid_search(ModelKind kind, GridRegime regime, const Dataset& d,
                             std::span<const std::size_t> train_rows,
                             std::span<const std::size_t> val_rows, std::uint64_t seed,
                             std::size_t jobs = 1);

}  // namespace mia
