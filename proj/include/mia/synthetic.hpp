#pragma once

#include <cstdint>

#include "mia/dataset.hpp"

namespace mia {

// Bundled synthetic benchmark data. A weak nonlinear signal plus heavy label
// noise: flexible models can memorize the noise (large generalization gap)
// while linear/Bayesian models stay close to their honest ceiling.
Dataset make_overfit_dataset(std::size_t n_rows, std::uint64_t seed);

// Same generator with two quasi-identifier columns. Most rows draw QI values
// from a small common pool; n_singles injected rows carry a unique QI value
// and outlying numeric features, making them both single-outs and easy for an
// overfit model to memorize.
Dataset make_singleout_dataset(std::size_t n_rows, std::size_t n_singles, std::uint64_t seed);

}  // namespace mia
