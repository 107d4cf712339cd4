#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hsdm/interaction_gnn.hpp"
#include "hsdm/mlp.hpp"
#include "hsdm/nceas_ingest.hpp"
#include "hsdm/negative_sampling.hpp"

namespace hsdm {

/// Mean sigmoid cross-entropy over pairs, in overflow-free logit form.
/// Throws EmptyInputError / ShapeMismatchError.
double bce_with_logits(std::span<const double> scores, std::span<const double> labels);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t num_epochs = 200;
  SamplingConfig sampling;
  ModelConfig model;
  std::uint64_t seed = 0;
  /// Write a checkpoint every N epochs when a path is supplied; 0 disables.
  std::size_t checkpoint_every = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint_path;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  ParamStore params;
  TrainHistory history;
};

/// The message-passing graph for one epoch: the training graph, plus
/// non-detection edges built from `negatives` when the model uses them.
TypedGraph epoch_message_graph(const SdmGraph& data, std::span<const LabeledPair> negatives,
                               const ModelConfig& model);

/// Graph used after training: non-detection edges come from the final epoch's sample.
TypedGraph inference_message_graph(const SdmGraph& data, const TrainConfig& config);

/// Mean training loss of `params` on one labelled batch, as a tape expression.
Var batch_loss(Tape& tape, const TypedGraph& graph, const ParamVars& params,
               const ModelConfig& model, std::span<const LabeledPair> batch);

/// Full-batch training. Throws NonFiniteLossError (the last periodic checkpoint,
/// if any, is left in place).
TrainResult train(const SdmGraph& data, const TrainConfig& config, const TrainOptions& options = {});

/// GNN checkpoint: parameters plus everything needed to rebuild the pipeline.
struct GnnCheckpoint {
  ParamStore params;
  TrainConfig config;
  FeatureDims dims;
  IngestOptions ingest;
  Normalizer normalizer;
  std::vector<std::string> species_ids;
};

void save_checkpoint(const std::filesystem::path& path, const GnnCheckpoint& checkpoint);
/// Throws IoError, CorruptCheckpointError, VersionMismatchError, ShapeMismatchError.
GnnCheckpoint load_checkpoint(const std::filesystem::path& path);
/// As above, and additionally requires the stored shapes to match `expected`.
GnnCheckpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace hsdm
