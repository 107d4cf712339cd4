#include "hsdm/negative_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

namespace {

enum Stream : std::uint32_t { kProportion = 1, kSampling = 2, kShuffle = 3 };

std::mt19937_64 epoch_rng(std::uint64_t seed, std::size_t epoch, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// k distinct values from [0, n) by a Fisher-Yates shuffle over a virtual array.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::mt19937_64& rng) {
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&swapped](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, n - 1);
    const std::size_t j = dist(rng);
    const std::size_t vi = at(i);
    const std::size_t vj = at(j);
    out.push_back(vj);
    swapped[j] = vi;
  }
  return out;
}

}  // namespace

std::string_view to_string(SamplingStrategy s) {
  return s == SamplingStrategy::uniform ? "uniform" : "stratified_k_locations";
}

SamplingStrategy parse_sampling_strategy(std::string_view name) {
  if (name == "uniform") return SamplingStrategy::uniform;
  if (name == "stratified_k_locations" || name == "stratified") {
    return SamplingStrategy::stratified_k_locations;
  }
  throw ConfigError(fmt::format("unknown negative sampling strategy '{}'", name));
}

void SamplingConfig::validate() const {
  if (!(proportion_from_po >= 0.0 && proportion_from_po <= 1.0)) {
    throw ConfigError(fmt::format("proportion_from_po {} outside [0, 1]", proportion_from_po));
  }
  if (strategy == SamplingStrategy::stratified_k_locations && k_locations == 0) {
    throw ConfigError("k_locations must be >= 1");
  }
}

double effective_po_proportion(const SamplingConfig& config, std::size_t epoch) {
  if (!config.random_proportion) return config.proportion_from_po;
  auto rng = epoch_rng(config.seed, epoch, kProportion);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::vector<LabeledPair> sample_negatives(std::span<const LabeledPair> positives,
                                          std::size_t num_po_locations,
                                          std::size_t num_background_locations,
                                          std::size_t num_species, const SamplingConfig& config,
                                          std::size_t epoch) {
  config.validate();
  const std::size_t P = num_po_locations;
  const std::size_t B = num_background_locations;
  const std::size_t S = num_species;

  std::vector<char> observed(P * S, 0);
  for (const LabeledPair& p : positives) {
    if (p.location_index >= P || p.species_index >= S) {
      throw IndexOutOfBoundsError(fmt::format(
          "positive ({}, {}) outside {} PO locations x {} species", p.location_index,
          p.species_index, P, S));
    }
    observed[p.location_index * S + p.species_index] = 1;
  }

  const double proportion = effective_po_proportion(config, epoch);
  auto rng = epoch_rng(config.seed, epoch, kSampling);
  std::vector<LabeledPair> out;

  if (config.strategy == SamplingStrategy::uniform) {
    const std::size_t total = config.negatives_per_epoch.mode == NegativeCount::Mode::fixed
                                  ? config.negatives_per_epoch.n
                                  : positives.size();
    const auto n_po = static_cast<std::size_t>(std::llround(proportion * static_cast<double>(total)));
    const std::size_t n_bg = total - n_po;

    std::vector<LabeledPair> po_pool;
    po_pool.reserve(P * S);
    for (std::size_t l = 0; l < P; ++l) {
      for (std::size_t s = 0; s < S; ++s) {
        if (!observed[l * S + s]) po_pool.push_back({l, s, 0});
      }
    }
    if (n_po > po_pool.size()) {
      throw InfeasibleRequestError(fmt::format(
          "requested {} PO negatives but only {} unobserved (PO location, species) pairs exist",
          n_po, po_pool.size()));
    }
    if (n_bg > B * S) {
      throw InfeasibleRequestError(fmt::format(
          "requested {} background negatives but only {} background pairs exist", n_bg, B * S));
    }
    out.reserve(total);
    for (std::size_t i : sample_without_replacement(po_pool.size(), n_po, rng)) {
      out.push_back(po_pool[i]);
    }
    for (std::size_t i : sample_without_replacement(B * S, n_bg, rng)) {
      out.push_back({P + i / S, i % S, 0});
    }
    return out;
  }

  // Stratified: k locations per species, split by proportion, topped up from
  // the other pool when one runs short.
  const std::size_t k = config.k_locations;
  const auto k_po = static_cast<std::size_t>(std::llround(proportion * static_cast<double>(k)));
  const std::size_t k_bg = k - k_po;
  std::vector<std::size_t> candidates;
  for (std::size_t s = 0; s < S; ++s) {
    candidates.clear();
    for (std::size_t l = 0; l < P; ++l) {
      if (!observed[l * S + s]) candidates.push_back(l);
    }
    std::size_t take_po = std::min(k_po, candidates.size());
    std::size_t take_bg = std::min(k_bg, B);
    const std::size_t shortfall = k - take_po - take_bg;
    const std::size_t extra_po = std::min(shortfall, candidates.size() - take_po);
    take_po += extra_po;
    take_bg += std::min(shortfall - extra_po, B - take_bg);

    for (std::size_t i : sample_without_replacement(candidates.size(), take_po, rng)) {
      out.push_back({candidates[i], s, 0});
    }
    for (std::size_t i : sample_without_replacement(B, take_bg, rng)) {
      out.push_back({P + i, s, 0});
    }
  }
  return out;
}

std::vector<LabeledPair> build_epoch_batch(std::span<const LabeledPair> positives,
                                           std::span<const LabeledPair> negatives,
                                           std::uint64_t seed, std::size_t epoch) {
  std::vector<LabeledPair> batch;
  batch.reserve(positives.size() + negatives.size());
  batch.insert(batch.end(), positives.begin(), positives.end());
  batch.insert(batch.end(), negatives.begin(), negatives.end());
  auto rng = epoch_rng(seed, epoch, kShuffle);
  std::shuffle(batch.begin(), batch.end(), rng);
  return batch;
}

std::vector<LinkPair> to_link_pairs(std::span<const LabeledPair> pairs) {
  std::vector<LinkPair> out;
  out.reserve(pairs.size());
  for (const LabeledPair& p : pairs) out.push_back({p.location_index, p.species_index});
  return out;
}

std::vector<double> labels_of(std::span<const LabeledPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const LabeledPair& p : pairs) out.push_back(static_cast<double>(p.label));
  return out;
}

}  // namespace hsdm
