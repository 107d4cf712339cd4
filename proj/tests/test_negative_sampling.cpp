#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "hsdm/errors.hpp"
#include "hsdm/negative_sampling.hpp"

using namespace hsdm;

namespace {

SamplingConfig uniform(double proportion, std::size_t count, std::uint64_t seed = 0) {
  SamplingConfig c;
  c.proportion_from_po = proportion;
  c.negatives_per_epoch = NegativeCount::fixed(count);
  c.seed = seed;
  return c;
}

std::vector<LabeledPair> random_positives(std::size_t P, std::size_t S, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(density);
  std::vector<LabeledPair> out;
  for (Index l = 0; l < P; ++l) {
    for (Index s = 0; s < S; ++s) {
      if (coin(rng)) out.push_back({l, s, 1});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("an empty PO pool cannot supply negatives") {
  const std::vector<LabeledPair> pos = {{0, 0, 1}, {0, 1, 1}};
  CHECK_THROWS_AS(sample_negatives(pos, 1, 0, 2, uniform(1.0, 1), 0), InfeasibleRequestError);
}

TEST_CASE("PO negatives are the complement of the positives") {
  const std::vector<LabeledPair> pos = {{0, 0, 1}, {1, 1, 1}};
  auto neg = sample_negatives(pos, 2, 0, 2, uniform(1.0, 2), 0);
  std::sort(neg.begin(), neg.end());
  const std::vector<LabeledPair> expected = {{0, 1, 0}, {1, 0, 0}};
  CHECK(neg == expected);
}

TEST_CASE("background-only sampling can exhaust the pool") {
  const std::vector<LabeledPair> pos = {{0, 0, 1}};
  auto neg = sample_negatives(pos, 1, 2, 2, uniform(0.0, 4), 3);
  std::sort(neg.begin(), neg.end());
  const std::vector<LabeledPair> expected = {{1, 0, 0}, {1, 1, 0}, {2, 0, 0}, {2, 1, 0}};
  CHECK(neg == expected);
  CHECK_THROWS_AS(sample_negatives(pos, 1, 2, 2, uniform(0.0, 5), 3), InfeasibleRequestError);
}

TEST_CASE("positives outside the PO locations are rejected") {
  const std::vector<LabeledPair> pos = {{3, 0, 1}};
  CHECK_THROWS_AS(sample_negatives(pos, 2, 5, 2, uniform(0.5, 2), 0), IndexOutOfBoundsError);
}

TEST_CASE("uniform sampling invariants") {
  std::mt19937_64 rng(12);
  const std::size_t P = 30, B = 40, S = 6;
  const auto pos = random_positives(P, S, 0.3, rng);
  const std::set<std::pair<Index, Index>> pos_set = [&] {
    std::set<std::pair<Index, Index>> s;
    for (const auto& p : pos) s.insert({p.location_index, p.species_index});
    return s;
  }();
  for (double proportion : {0.0, 0.25, 0.5, 0.73, 1.0}) {
    for (std::size_t count : {1u, 7u, 50u}) {
      for (std::size_t epoch : {0u, 1u, 9u}) {
        const auto neg = sample_negatives(pos, P, B, S, uniform(proportion, count, 5), epoch);
        REQUIRE(neg.size() == count);
        std::set<std::pair<Index, Index>> seen;
        std::size_t from_po = 0;
        for (const auto& n : neg) {
          CHECK(n.label == 0);
          CHECK(n.location_index < P + B);
          CHECK(n.species_index < S);
          CHECK(pos_set.count({n.location_index, n.species_index}) == 0);
          CHECK(seen.insert({n.location_index, n.species_index}).second);
          if (n.location_index < P) ++from_po;
        }
        const double realized = static_cast<double>(from_po) / static_cast<double>(count);
        CHECK(std::abs(realized - proportion) <= 1.0 / static_cast<double>(count) + 1e-12);
      }
    }
  }
}

TEST_CASE("match_positive_count draws as many negatives as positives") {
  std::mt19937_64 rng(1);
  const auto pos = random_positives(20, 4, 0.3, rng);
  SamplingConfig c;
  c.proportion_from_po = 0.5;
  const auto neg = sample_negatives(pos, 20, 30, 4, c, 0);
  CHECK(neg.size() == pos.size());
}

TEST_CASE("sampling is a pure function of inputs, seed and epoch") {
  std::mt19937_64 rng(3);
  const auto pos = random_positives(25, 5, 0.3, rng);
  const auto a = sample_negatives(pos, 25, 25, 5, uniform(0.5, 20, 7), 4);
  const auto b = sample_negatives(pos, 25, 25, 5, uniform(0.5, 20, 7), 4);
  const auto other_epoch = sample_negatives(pos, 25, 25, 5, uniform(0.5, 20, 7), 5);
  const auto other_seed = sample_negatives(pos, 25, 25, 5, uniform(0.5, 20, 8), 4);
  CHECK(a == b);
  CHECK(a != other_epoch);
  CHECK(a != other_seed);
}

TEST_CASE("stratified sampling gives each species min(k, pool) negatives") {
  std::mt19937_64 rng(4);
  const std::size_t P = 12, B = 3, S = 5;
  auto pos = random_positives(P, S, 0.5, rng);
  // Species 4 is observed everywhere so only background can serve it.
  for (Index l = 0; l < P; ++l) {
    if (std::none_of(pos.begin(), pos.end(),
                     [&](const LabeledPair& p) { return p.location_index == l && p.species_index == 4; })) {
      pos.push_back({l, 4, 1});
    }
  }
  for (std::size_t k : {1u, 4u, 9u, 40u}) {
    for (double proportion : {0.0, 0.5, 1.0}) {
      SamplingConfig c;
      c.strategy = SamplingStrategy::stratified_k_locations;
      c.k_locations = k;
      c.proportion_from_po = proportion;
      const auto neg = sample_negatives(pos, P, B, S, c, 2);
      for (Index s = 0; s < S; ++s) {
        std::size_t pool = B;
        for (Index l = 0; l < P; ++l) {
          if (std::none_of(pos.begin(), pos.end(),
                           [&](const LabeledPair& p) { return p.location_index == l && p.species_index == s; })) {
            ++pool;
          }
        }
        const auto got = std::count_if(neg.begin(), neg.end(), [&](const LabeledPair& n) { return n.species_index == s; });
        CHECK(static_cast<std::size_t>(got) == std::min(k, pool));
      }
    }
  }
}

TEST_CASE("random proportion is drawn per epoch in [0, 1]") {
  SamplingConfig c;
  c.random_proportion = true;
  c.seed = 2;
  const double a = effective_po_proportion(c, 0);
  const double b = effective_po_proportion(c, 1);
  CHECK(a >= 0.0);
  CHECK(a <= 1.0);
  CHECK(a != b);
  CHECK(a == effective_po_proportion(c, 0));
}

TEST_CASE("invalid sampling configurations") {
  SamplingConfig c;
  c.proportion_from_po = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SamplingConfig{};
  c.strategy = SamplingStrategy::stratified_k_locations;
  c.k_locations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_sampling_strategy("random"), ConfigError);
}

TEST_CASE("epoch batch holds every positive and negative") {
  std::vector<LabeledPair> pos, neg;
  for (Index i = 0; i < 10; ++i) {
    pos.push_back({i, 0, 1});
    neg.push_back({i, 1, 0});
  }
  const auto batch = build_epoch_batch(pos, neg, 3, 0);
  CHECK(batch.size() == 20);
  CHECK(std::count_if(batch.begin(), batch.end(), [](const LabeledPair& p) { return p.label == 1; }) == 10);
  auto sorted = batch;
  std::sort(sorted.begin(), sorted.end());
  auto expected = pos;
  expected.insert(expected.end(), neg.begin(), neg.end());
  std::sort(expected.begin(), expected.end());
  CHECK(sorted == expected);

  CHECK(build_epoch_batch(pos, neg, 3, 0) == batch);
  CHECK(build_epoch_batch(pos, neg, 3, 1) != batch);
}

TEST_CASE("an epoch batch without negatives is the shuffled positives") {
  std::vector<LabeledPair> pos;
  for (Index i = 0; i < 8; ++i) pos.push_back({i, i % 2, 1});
  auto batch = build_epoch_batch(pos, {}, 1, 0);
  std::sort(batch.begin(), batch.end());
  auto expected = pos;
  std::sort(expected.begin(), expected.end());
  CHECK(batch == expected);
}

TEST_CASE("pair helpers") {
  const std::vector<LabeledPair> pairs = {{3, 1, 1}, {0, 2, 0}};
  const auto links = to_link_pairs(pairs);
  CHECK(links[0].location == 3);
  CHECK(links[1].species == 2);
  CHECK(labels_of(pairs) == std::vector<double>{1.0, 0.0});
}
