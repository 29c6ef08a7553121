#pragma once

#include "mia/model.hpp"

namespace mia {

// Label-independent pseudo-random predictor: the probability vector is a
// deterministic hash of the input features and a seed. Used as a calibration
// target — any attack run against it should sit at chance.
class NoiseModel : public Model {
 public:
  NoiseModel(int n_classes, std::uint64_t seed);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<NoiseModel> from_json(const nlohmann::json& j);

 private:
  std::uint64_t seed_ = 0;
};

// Wraps a noise model over a dataset's encoding as a black-box handle.
TrainedModel make_noise_target(const Dataset& d, std::span<const std::size_t> encoder_rows,
                               std::uint64_t seed);

}  // namespace mia
