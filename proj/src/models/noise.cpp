#include "mia/models/noise.hpp"

#include <cmath>
#include <cstring>

#include "mia/rng.hpp"

namespace mia {

NoiseModel::NoiseModel(int n_classes, std::uint64_t seed) : seed_(seed) {
  n_classes_ = n_classes;
}

std::vector<double> NoiseModel::predict_proba(std::span<const double> x) const {
  // FNV-1a over the raw feature bytes, then a per-input generator.
  std::uint64_t h = 14695981039346656037ull ^ seed_;
  for (double v : x) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  Rng rng(h);
  std::vector<double> p(n_classes_);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log(std::max(rng.next_double(), 1e-12));  // Dirichlet(1,...,1)
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

nlohmann::json NoiseModel::to_json() const {
  return {{"type", "noise"}, {"n_classes", n_classes_}, {"seed", seed_}};
}

std::unique_ptr<NoiseModel> NoiseModel::from_json(const nlohmann::json& j) {
  return std::make_unique<NoiseModel>(j.at("n_classes").get<int>(),
                                      j.at("seed").get<std::uint64_t>());
}

TrainedModel make_noise_target(const Dataset& d, std::span<const std::size_t> encoder_rows,
                               std::uint64_t seed) {
  auto encoder = std::make_shared<Encoder>(Encoder::fit(d, encoder_rows));
  auto model = std::make_shared<NoiseModel>(d.n_classes(), seed);
  ModelSpec spec;
  spec.seed = seed;
  return TrainedModel(spec, std::move(encoder), std::move(model));
}

}  // namespace mia
