#pragma once

// Feed-forward multi-species baseline. Inputs are normalized location
// features; the head has one logit per species. PO locations carry their
// observed species as positives and every other species as negative;
// background locations are negative for all species.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hsdm/mlp.hpp"
#include "hsdm/nceas_ingest.hpp"
#include "hsdm/normalizer.hpp"
#include "hsdm/trainer.hpp"

namespace hsdm {

struct BaselineConfig {
  std::size_t hidden_dim = 32;
  std::size_t num_layers = 4;  // activated hidden layers
  /// Background rows per PO row in each minibatch.
  double background_mix_ratio = 0.0;
  /// Additive uniform noise in [-noise_scale, noise_scale] per feature per presentation.
  double noise_scale = 0.02;
  double learning_rate = 1e-3;
  std::size_t num_epochs = 100;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  Activation activation = Activation::relu;

  void validate() const;
  bool operator==(const BaselineConfig&) const = default;
};

struct BaselineData {
  Matrix po_features;          // normalized, one row per aggregated PO location
  Matrix po_labels;            // P x n_species multi-hot
  Matrix background_features;  // normalized
  Normalizer normalizer;
  std::vector<std::string> species_ids;
  bool include_coords = false;
};

/// Aggregates PO locations and fits the normalizer on PO and background rows.
BaselineData make_baseline_data(const RegionDataset& dataset, bool include_coords = false);

struct BatchRow {
  bool background = false;
  Index row = 0;
  bool operator==(const BatchRow&) const = default;
};

/// Minibatch composition for one epoch: every PO row once, each batch topped
/// up with round(po_rows * ratio) background rows.
std::vector<std::vector<BatchRow>> plan_epoch_batches(Index num_po, Index num_background,
                                                      const BaselineConfig& config,
                                                      std::size_t epoch);

struct BaselineResult {
  MlpParams params;
  TrainHistory history;
};

/// Throws NonFiniteLossError.
BaselineResult train_baseline(const BaselineData& data, const BaselineConfig& config);

/// Sigmoid probabilities, n x n_species. Throws ShapeMismatchError.
Matrix predict_baseline(const MlpParams& params, const Matrix& normalized_features);

struct BaselineCheckpoint {
  MlpParams params;
  BaselineConfig config;
  Normalizer normalizer;
  bool include_coords = false;
  std::vector<std::string> species_ids;
};

void save_baseline_checkpoint(const std::filesystem::path& path, const BaselineCheckpoint& ckpt);
BaselineCheckpoint load_baseline_checkpoint(const std::filesystem::path& path);

}  // namespace hsdm
