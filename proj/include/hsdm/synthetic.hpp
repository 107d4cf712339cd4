#pragma once

// Generated regions with known species-environment relationships, used by
// tests, gradient checks and the recovery benchmark.
//
// Each species has a logistic-linear suitability over standardized
// environment draws u in [-1, 1]^k:  p_s(u) = sigmoid(steepness * (w_s . u + b_s)).
// PO locations are kept only if at least one species is detected there;
// PA sites carry a Bernoulli(p_s) label for every species.

#include <cstdint>
#include <filesystem>
#include <string>

#include "hsdm/nceas_ingest.hpp"

namespace hsdm {

struct SyntheticRegionConfig {
  std::string region_code = "SYN";
  std::size_t num_species = 5;
  std::size_t num_env = 2;
  std::size_t num_po_locations = 200;  // distinct locations with at least one detection
  std::size_t num_background = 500;
  std::size_t num_pa_sites = 300;       // distinct test locations
  std::size_t num_pa_duplicates = 0;    // extra test sites reusing an existing location
  /// Probability that a detection is recorded twice (exercises aggregation).
  double duplicate_record_rate = 0.1;
  double steepness = 6.0;
  std::size_t num_groups = 0;  // 0: species.csv has empty groups
  std::uint64_t seed = 1;
};

struct SyntheticRegion {
  RegionDataset dataset;
  Matrix weights;          // num_species x num_env
  Eigen::VectorXd biases;  // num_species
  /// Suitability of each species at each PA site, n_sites x num_species.
  Matrix pa_suitability;
};

SyntheticRegion generate_region(const SyntheticRegionConfig& config);

/// Writes po.csv, bg.csv, pa_env.csv, pa_labels.csv and species.csv into `dir`.
/// Species whose labels are all -1 get no pa_labels column.
void write_region(const RegionDataset& dataset, const std::filesystem::path& dir);

/// Small separable regions used across the test suite.
SyntheticRegionConfig toy_region_config(std::uint64_t seed = 1);
/// Schema of the AWT region: 13 env variables, 40 species in groups; counts scaled by `scale`.
SyntheticRegionConfig awt_like_config(double scale = 1.0, std::uint64_t seed = 7);
/// Schema of the SWI region: 13 env variables, 30 species, no groups.
SyntheticRegionConfig swi_like_config(double scale = 1.0, std::uint64_t seed = 11);

}  // namespace hsdm
