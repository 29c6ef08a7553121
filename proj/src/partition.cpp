#include "mia/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mia/rng.hpp"

namespace mia {

DataPartition make_partition(const Dataset& d, std::uint64_t seed) {
  const std::size_t n = d.n_rows();
  if (n < 8) throw std::runtime_error("partition requires at least 8 rows");

  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.derive(0).shuffle(idx);

  DataPartition p;
  p.seed = seed;
  const std::size_t n_pop = n / 2;
  const std::size_t rest = n - n_pop;
  const std::size_t n_test = rest / 4;  // 25% of the private data, floored
  const std::size_t n_train = rest - n_test;

  p.population.assign(idx.begin(), idx.begin() + n_pop);
  p.target_train.assign(idx.begin() + n_pop, idx.begin() + n_pop + n_train);
  p.target_test.assign(idx.begin() + n_pop + n_train, idx.end());

  // Balanced inference pool: 25% of train as members (ceil), capped at the
  // test size so that members and non-members come out exactly equal.
  const std::size_t want_members = (n_train + 3) / 4;
  const std::size_t m = std::min(want_members, n_test);
  Rng member_rng = rng.derive(1);
  p.inference_members = member_rng.sample(p.target_train, m);
  Rng nonmember_rng = rng.derive(2);
  p.inference_nonmembers = nonmember_rng.sample(p.target_test, m);
  return p;
}

std::vector<FederatedShard> make_federated_shards(const DataPartition& p,
                                                  std::size_t n_participants,
                                                  std::uint64_t seed) {
  if (n_participants < 1) throw std::runtime_error("n_participants must be >= 1");
  if (p.target_train.size() < n_participants)
    throw std::runtime_error("fewer training rows than participants");

  Rng rng(seed);
  auto split = [&](const std::vector<std::size_t>& rows, std::uint64_t stream) {
    std::vector<std::size_t> shuffled = rows;
    rng.derive(stream).shuffle(shuffled);
    std::vector<std::vector<std::size_t>> parts(n_participants);
    const std::size_t base = shuffled.size() / n_participants;
    const std::size_t extra = shuffled.size() % n_participants;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < n_participants; ++j) {
      const std::size_t len = base + (j < extra ? 1 : 0);
      parts[j].assign(shuffled.begin() + pos, shuffled.begin() + pos + len);
      pos += len;
    }
    return parts;
  };

  auto train_parts = split(p.target_train, 0);
  auto test_parts = split(p.target_test, 1);
  std::vector<FederatedShard> shards(n_participants);
  for (std::size_t j = 0; j < n_participants; ++j) {
    shards[j].train = std::move(train_parts[j]);
    shards[j].test = std::move(test_parts[j]);
  }
  return shards;
}

namespace {
nlohmann::json to_array(const std::vector<std::size_t>& v) {
  return nlohmann::json(v);
}
std::vector<std::size_t> from_array(const nlohmann::json& j) {
  return j.get<std::vector<std::size_t>>();
}
}  // namespace

nlohmann::json partition_to_json(const DataPartition& p) {
  nlohmann::json j;
  j["seed"] = p.seed;
  j["population"] = to_array(p.population);
  j["target_train"] = to_array(p.target_train);
  j["target_test"] = to_array(p.target_test);
  j["inference_members"] = to_array(p.inference_members);
  j["inference_nonmembers"] = to_array(p.inference_nonmembers);
  return j;
}

DataPartition partition_from_json(const nlohmann::json& j) {
  DataPartition p;
  p.seed = j.at("seed").get<std::uint64_t>();
  p.population = from_array(j.at("population"));
  p.target_train = from_array(j.at("target_train"));
  p.target_test = from_array(j.at("target_test"));
  p.inference_members = from_array(j.at("inference_members"));
  p.inference_nonmembers = from_array(j.at("inference_nonmembers"));
  return p;
}

}  // namespace mia
