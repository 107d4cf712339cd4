#pragma once

// Region loading and training-graph construction.
//
// Canonical CSV schemas (UTF-8, header row, '.' decimal):
//   po.csv         species_id, x, y, <env_1..env_k>
//   bg.csv         x, y, <env_1..env_k>
//   pa_env.csv     site_id, x, y, <env_1..env_k>
//   pa_labels.csv  site_id, <one 0/1 column per species_id>
//   species.csv    species_id, group   (group may be empty)

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hsdm/interaction_gnn.hpp"
#include "hsdm/negative_sampling.hpp"
#include "hsdm/normalizer.hpp"
#include "hsdm/typed_graph.hpp"

namespace hsdm {

struct RegionPaths {
  std::filesystem::path po;
  std::filesystem::path background;
  std::filesystem::path pa_env;
  std::filesystem::path pa_labels;
  std::filesystem::path species;

  /// <dir>/po.csv, <dir>/bg.csv, <dir>/pa_env.csv, <dir>/pa_labels.csv, <dir>/species.csv
  static RegionPaths in_directory(const std::filesystem::path& dir);
};

struct SpeciesEntry {
  std::string id;
  std::string group;  // empty when the region has no group information
};

struct PoRecords {
  std::vector<Index> species;  // index into RegionDataset::species
  Matrix coords;               // n x 2 (x, y)
  Matrix env;                  // n x k
  Index size() const { return species.size(); }
};

struct BackgroundLocations {
  Matrix coords;
  Matrix env;
  Index size() const { return static_cast<Index>(coords.rows()); }
};

struct PaTest {
  std::vector<std::string> site_ids;
  Matrix coords;
  Matrix env;
  /// n x n_species; 1 present, 0 absent, -1 when the species has no label column.
  Eigen::MatrixXi labels;
  Index size() const { return site_ids.size(); }
};

struct RegionDataset {
  std::string region_code;
  std::vector<std::string> env_feature_names;
  std::vector<SpeciesEntry> species;  // sorted by id; position is the species index
  PoRecords po;
  BackgroundLocations background;
  PaTest pa_test;

  Index num_species() const { return species.size(); }
  /// Distinct (x, y) among the presence-absence sites.
  Index unique_test_locations() const;
};

/// Throws IoError, MissingColumnError, NonNumericFeatureError, UnknownSpeciesError,
/// InconsistentWidthError.
RegionDataset load_region(const RegionPaths& paths, std::string region_code = {});

struct AggregatedLocations {
  Matrix coords;  // unique (x, y), sorted lexicographically
  Matrix env;     // arithmetic mean over records sharing the location
  /// Unique (location, species) pairs, sorted.
  std::vector<std::pair<Index, Index>> detections;
};

/// Locations are keyed by exact (x, y) equality.
AggregatedLocations aggregate_locations(const PoRecords& records);

struct SpeciesFeatureSpec {
  Index one_hot_dim = 0;
  bool include_group = false;
  std::vector<std::string> group_vocabulary;  // ordered

  /// Groups are included whenever any species carries one.
  static SpeciesFeatureSpec from_table(const std::vector<SpeciesEntry>& species);
};

/// Row j is one_hot(j), followed by one_hot(group) when spec.include_group.
/// Throws UnknownGroupError.
Matrix build_species_features(const std::vector<SpeciesEntry>& species,
                              const SpeciesFeatureSpec& spec);

struct IngestOptions {
  bool normalize = true;        // min-max scale location features to [-1, 1]
  bool include_coords = false;  // append x, y to the environmental features
  bool operator==(const IngestOptions&) const = default;
};

/// Training graph plus the bookkeeping training and evaluation need.
struct SdmGraph {
  TypedGraph graph;
  Index num_po_locations = 0;
  Index num_background_locations = 0;
  std::vector<LabeledPair> positives;  // one per det_l2s edge, label 1
  Normalizer normalizer;
  std::vector<std::string> species_ids;
  IngestOptions options;
};

/// Raw (unnormalized) location inputs: env features, plus coords when requested.
Matrix location_inputs(const Matrix& env, const Matrix& coords, const IngestOptions& options);

/// Location set = aggregated PO locations then background locations; species
/// set from build_species_features; det_l2s from the detection pairs, and
/// det_s2l as its reverse when the model is bidirectional.
SdmGraph build_training_graph(const RegionDataset& dataset, const ModelConfig& model,
                              const IngestOptions& options = {});

/// PA test location features transformed exactly like the training locations.
Matrix test_location_features(const RegionDataset& dataset, const SdmGraph& graph);

/// Adds (or replaces) nondet_l2s built from `negatives`, plus nondet_s2l when bidirectional.
TypedGraph with_negative_message_edges(const TypedGraph& graph,
                                       std::span<const LabeledPair> negatives,
                                       const ModelConfig& model);

}  // namespace hsdm
