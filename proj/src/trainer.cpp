#include "hsdm/trainer.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "hsdm/checkpoint.hpp"
#include "hsdm/config_json.hpp"
#include "hsdm/errors.hpp"
#include "hsdm/logging.hpp"
#include "hsdm/optimizer.hpp"

namespace hsdm {

double bce_with_logits(std::span<const double> scores, std::span<const double> labels) {
  if (scores.empty()) throw EmptyInputError("bce_with_logits: no scores");
  if (scores.size() != labels.size()) {
    throw ShapeMismatchError(
        fmt::format("bce_with_logits: {} scores but {} labels", scores.size(), labels.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) total += sigmoid_cross_entropy(scores[i], labels[i]);
  return total / static_cast<double>(scores.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError(fmt::format("learning_rate must be positive, got {}", learning_rate));
  }
  if (num_epochs < 1) throw ConfigError("num_epochs must be at least 1");
  sampling.validate();
  model.validate();
}

TypedGraph epoch_message_graph(const SdmGraph& data, std::span<const LabeledPair> negatives,
                               const ModelConfig& model) {
  if (!model.include_negative_edges) return data.graph;
  return with_negative_message_edges(data.graph, negatives, model);
}

TypedGraph inference_message_graph(const SdmGraph& data, const TrainConfig& config) {
  if (!config.model.include_negative_edges) return data.graph;
  const std::size_t num_species = data.graph.node_set(names::kSpecies).count;
  const auto negatives =
      sample_negatives(data.positives, data.num_po_locations, data.num_background_locations,
                       num_species, config.sampling, config.num_epochs - 1);
  return with_negative_message_edges(data.graph, negatives, config.model);
}

Var batch_loss(Tape& tape, const TypedGraph& graph, const ParamVars& params,
               const ModelConfig& model, std::span<const LabeledPair> batch) {
  const auto pairs = to_link_pairs(batch);
  const auto labels = labels_of(batch);
  const Var scores = forward_scores(tape, graph, params, model, pairs);
  return ad::bce_with_logits_mean(scores, labels);
}

namespace {

GnnCheckpoint checkpoint_of(const SdmGraph& data, const TrainConfig& config, const ParamStore& params) {
  return {params, config, feature_dims(data.graph), data.options, data.normalizer, data.species_ids};
}

}  // namespace

TrainResult train(const SdmGraph& data, const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  data.graph.validate();
  const FeatureDims dims = feature_dims(data.graph);
  const std::size_t num_species = data.graph.node_set(names::kSpecies).count;

  TrainResult result;
  result.params = init_params(config.model, dims, config.seed);
  OptimizerState state = make_optimizer_state(result.params);

  for (std::size_t epoch = 0; epoch < config.num_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto negatives =
        sample_negatives(data.positives, data.num_po_locations, data.num_background_locations,
                         num_species, config.sampling, epoch);
    const auto batch = build_epoch_batch(data.positives, negatives, config.seed, epoch);
    const TypedGraph graph = epoch_message_graph(data, negatives, config.model);

    LossAndGrad step;
    try {
      step = value_and_grad(result.params, [&](Tape& tape, const ParamVars& vars) {
        return batch_loss(tape, graph, vars, config.model, batch);
      });
    } catch (const NonFiniteLossError& e) {
      throw NonFiniteLossError(fmt::format("epoch {}: {}", epoch, e.what()));
    }
    optimizer_step(result.params, step.gradients, state, config.learning_rate);
    if (!all_finite(result.params)) {
      throw NonFiniteLossError(fmt::format("epoch {}: parameters became non-finite", epoch));
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = step.loss;
    record.n_pos = data.positives.size();
    record.n_neg = negatives.size();
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(record);
    log::debug("epoch {} loss {:.6f} pos {} neg {}", epoch, record.loss, record.n_pos, record.n_neg);
    if (options.on_epoch) options.on_epoch(record);

    if (options.checkpoint_path && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0) {
      save_checkpoint(*options.checkpoint_path, checkpoint_of(data, config, result.params));
    }
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const GnnCheckpoint& checkpoint) {
  CheckpointContents contents;
  contents.kind = "gnn";
  contents.config = {{"train", to_json(checkpoint.config)},
                     {"feature_dims", to_json(checkpoint.dims)},
                     {"ingest", to_json(checkpoint.ingest)},
                     {"species_ids", checkpoint.species_ids}};
  contents.params = checkpoint.params;
  contents.extras.emplace("normalizer/min", Matrix(checkpoint.normalizer.min));
  contents.extras.emplace("normalizer/max", Matrix(checkpoint.normalizer.max));
  write_checkpoint(path, contents);
}

GnnCheckpoint load_checkpoint(const std::filesystem::path& path) {
  CheckpointContents contents = read_checkpoint(path);
  if (contents.kind != "gnn") {
    throw ConfigError(fmt::format("{} holds a '{}' model, not a gnn", path.string(), contents.kind));
  }
  GnnCheckpoint out;
  try {
    out.config = train_config_from_json(contents.config.at("train"));
    out.dims = feature_dims_from_json(contents.config.at("feature_dims"));
    out.ingest = ingest_options_from_json(contents.config.at("ingest"));
    out.species_ids = contents.config.at("species_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(fmt::format("{}: malformed config: {}", path.string(), e.what()));
  }
  auto lo = contents.extras.find("normalizer/min");
  auto hi = contents.extras.find("normalizer/max");
  if (lo == contents.extras.end() || hi == contents.extras.end() || lo->second.rows() != 1 ||
      hi->second.rows() != 1 || lo->second.cols() != hi->second.cols()) {
    throw CorruptCheckpointError(fmt::format("{}: missing normalizer bounds", path.string()));
  }
  out.normalizer.min = lo->second.row(0);
  out.normalizer.max = hi->second.row(0);
  out.params = std::move(contents.params);
  check_params(out.params, out.config.model, out.dims);
  return out;
}

GnnCheckpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  GnnCheckpoint out = load_checkpoint(path);
  check_params(out.params, expected, out.dims);
  if (!(out.config.model == expected)) {
    throw ShapeMismatchError(fmt::format("{}: stored model configuration differs from the expected one",
                                         path.string()));
  }
  return out;
}

}  // namespace hsdm
