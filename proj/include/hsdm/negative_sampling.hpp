#pragma once

// Pseudo-negative (location, species) pairs.
//
// Locations are indexed as in the training graph: presence-only (PO)
// locations occupy [0, num_po) and background locations [num_po, num_po + num_bg).
// Negatives come from two pools: PO locations paired with species never
// observed there, and background locations paired with any species.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hsdm/interaction_gnn.hpp"

namespace hsdm {

enum class SamplingStrategy { uniform, stratified_k_locations };

std::string_view to_string(SamplingStrategy s);
SamplingStrategy parse_sampling_strategy(std::string_view name);

struct NegativeCount {
  enum class Mode { match_positive_count, fixed };
  Mode mode = Mode::match_positive_count;
  std::size_t n = 0;  // used when mode == fixed

  static NegativeCount match_positives() { return {Mode::match_positive_count, 0}; }
  static NegativeCount fixed(std::size_t n) { return {Mode::fixed, n}; }
  bool operator==(const NegativeCount&) const = default;
};

struct SamplingConfig {
  SamplingStrategy strategy = SamplingStrategy::uniform;
  std::size_t k_locations = 10;
  NegativeCount negatives_per_epoch = NegativeCount::match_positives();
  double proportion_from_po = 1.0;
  /// Draw the PO proportion uniformly in [0, 1] once per epoch instead.
  bool random_proportion = false;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SamplingConfig&) const = default;
};

struct LabeledPair {
  Index location_index = 0;
  Index species_index = 0;
  int label = 0;

  bool operator==(const LabeledPair&) const = default;
  auto operator<=>(const LabeledPair&) const = default;
};

/// The PO proportion actually used for `epoch` (fixed, or the per-epoch draw).
double effective_po_proportion(const SamplingConfig& config, std::size_t epoch);

/// Label-0 pairs, deterministic in (inputs, config.seed, epoch). Sampling is
/// without replacement within a call. Throws InfeasibleRequestError when the
/// uniform strategy asks for more pairs than a pool holds, and
/// IndexOutOfBoundsError when a positive lies outside the PO locations.
std::vector<LabeledPair> sample_negatives(std::span<const LabeledPair> positives,
                                          std::size_t num_po_locations,
                                          std::size_t num_background_locations,
                                          std::size_t num_species, const SamplingConfig& config,
                                          std::size_t epoch);

/// All positives followed by all negatives, shuffled deterministically by (seed, epoch).
std::vector<LabeledPair> build_epoch_batch(std::span<const LabeledPair> positives,
                                           std::span<const LabeledPair> negatives,
                                           std::uint64_t seed, std::size_t epoch);

std::vector<LinkPair> to_link_pairs(std::span<const LabeledPair> pairs);
std::vector<double> labels_of(std::span<const LabeledPair> pairs);

}  // namespace hsdm
