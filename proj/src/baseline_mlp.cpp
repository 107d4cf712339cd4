#include "hsdm/baseline_mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "hsdm/checkpoint.hpp"
#include "hsdm/config_json.hpp"
#include "hsdm/errors.hpp"
#include "hsdm/logging.hpp"
#include "hsdm/optimizer.hpp"

namespace hsdm {

namespace {

enum Stream : std::uint32_t { kPoOrder = 11, kBackgroundDraw = 12, kNoise = 13 };

std::mt19937_64 epoch_rng(std::uint64_t seed, std::size_t epoch, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Matrix stack_rows(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

MlpSpec baseline_spec(const BaselineConfig& config, std::size_t input_dim, std::size_t num_species) {
  MlpSpec spec{input_dim, config.hidden_dim, config.num_layers, num_species, config.activation};
  spec.validate();
  return spec;
}

constexpr const char* kRole = "baseline";

}  // namespace

void BaselineConfig::validate() const {
  if (hidden_dim == 0) throw ConfigError("baseline hidden_dim must be positive");
  if (num_layers == 0) throw ConfigError("baseline num_layers must be positive");
  if (batch_size == 0) throw ConfigError("baseline batch_size must be positive");
  if (num_epochs == 0) throw ConfigError("baseline num_epochs must be positive");
  if (!(background_mix_ratio >= 0.0) || !std::isfinite(background_mix_ratio)) {
    throw ConfigError(fmt::format("background_mix_ratio must be finite and >= 0, got {}",
                                  background_mix_ratio));
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError(fmt::format("noise_scale must be finite and >= 0, got {}", noise_scale));
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError(fmt::format("baseline learning_rate must be positive, got {}", learning_rate));
  }
}

BaselineData make_baseline_data(const RegionDataset& dataset, bool include_coords) {
  const IngestOptions options{true, include_coords};
  const AggregatedLocations agg = aggregate_locations(dataset.po);
  const Matrix po_raw = location_inputs(agg.env, agg.coords, options);
  const Matrix bg_raw = location_inputs(dataset.background.env, dataset.background.coords, options);

  BaselineData data;
  data.normalizer = fit_normalizer(stack_rows(po_raw, bg_raw));
  data.po_features = data.normalizer.apply(po_raw);
  data.background_features = data.normalizer.apply(bg_raw);
  data.po_labels = Matrix::Zero(po_raw.rows(), static_cast<Eigen::Index>(dataset.num_species()));
  for (const auto& [loc, sp] : agg.detections) {
    data.po_labels(static_cast<Eigen::Index>(loc), static_cast<Eigen::Index>(sp)) = 1.0;
  }
  for (const auto& s : dataset.species) data.species_ids.push_back(s.id);
  data.include_coords = include_coords;
  return data;
}

std::vector<std::vector<BatchRow>> plan_epoch_batches(Index num_po, Index num_background,
                                                      const BaselineConfig& config,
                                                      std::size_t epoch) {
  config.validate();
  std::vector<Index> po_order(num_po);
  std::iota(po_order.begin(), po_order.end(), Index{0});
  auto order_rng = epoch_rng(config.seed, epoch, kPoOrder);
  std::shuffle(po_order.begin(), po_order.end(), order_rng);

  std::vector<Index> bg_order(num_background);
  std::iota(bg_order.begin(), bg_order.end(), Index{0});
  auto bg_rng = epoch_rng(config.seed, epoch, kBackgroundDraw);
  std::shuffle(bg_order.begin(), bg_order.end(), bg_rng);
  std::size_t bg_cursor = 0;

  std::vector<std::vector<BatchRow>> batches;
  for (std::size_t begin = 0; begin < num_po; begin += config.batch_size) {
    const std::size_t end = std::min<std::size_t>(num_po, begin + config.batch_size);
    std::vector<BatchRow> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back({false, po_order[i]});
    if (num_background > 0) {
      const auto n_bg = static_cast<std::size_t>(
          std::llround(static_cast<double>(end - begin) * config.background_mix_ratio));
      for (std::size_t i = 0; i < n_bg; ++i) {
        if (bg_cursor == bg_order.size()) {
          std::shuffle(bg_order.begin(), bg_order.end(), bg_rng);
          bg_cursor = 0;
        }
        batch.push_back({true, bg_order[bg_cursor++]});
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

BaselineResult train_baseline(const BaselineData& data, const BaselineConfig& config) {
  config.validate();
  if (data.po_features.rows() == 0) throw EmptyInputError("baseline training needs PO locations");
  const auto width = static_cast<std::size_t>(data.po_features.cols());
  const auto num_species = static_cast<std::size_t>(data.po_labels.cols());
  if (data.background_features.rows() > 0 &&
      static_cast<std::size_t>(data.background_features.cols()) != width) {
    throw ShapeMismatchError("background features differ in width from PO features");
  }

  ParamStore store;
  store.emplace(kRole, mlp_init(baseline_spec(config, width, num_species),
                                config.seed ^ stable_hash(kRole)));
  OptimizerState state = make_optimizer_state(store);
  std::uniform_real_distribution<double> noise(-config.noise_scale, config.noise_scale);

  BaselineResult result;
  for (std::size_t epoch = 0; epoch < config.num_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = plan_epoch_batches(static_cast<Index>(data.po_features.rows()),
                                            static_cast<Index>(data.background_features.rows()),
                                            config, epoch);
    auto noise_rng = epoch_rng(config.seed, epoch, kNoise);
    double weighted_loss = 0.0;
    std::size_t rows_seen = 0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    for (const auto& batch : batches) {
      const auto n = static_cast<Eigen::Index>(batch.size());
      Matrix inputs(n, static_cast<Eigen::Index>(width));
      Matrix labels = Matrix::Zero(n, static_cast<Eigen::Index>(num_species));
      for (Eigen::Index r = 0; r < n; ++r) {
        const BatchRow& row = batch[static_cast<std::size_t>(r)];
        const auto idx = static_cast<Eigen::Index>(row.row);
        if (row.background) {
          inputs.row(r) = data.background_features.row(idx);
        } else {
          inputs.row(r) = data.po_features.row(idx);
          labels.row(r) = data.po_labels.row(idx);
        }
      }
      if (config.noise_scale > 0.0) {
        for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
          for (Eigen::Index c = 0; c < inputs.cols(); ++c) inputs(r, c) += noise(noise_rng);
        }
      }
      const auto positives = static_cast<std::size_t>(labels.sum());
      n_pos += positives;
      n_neg += static_cast<std::size_t>(labels.size()) - positives;

      LossAndGrad step;
      try {
        step = value_and_grad(store, [&](Tape& tape, const ParamVars& vars) {
          const Var logits = mlp_apply(vars.at(kRole), tape.constant(inputs));
          return ad::bce_with_logits_mean(logits, labels);
        });
      } catch (const NonFiniteLossError& e) {
        throw NonFiniteLossError(fmt::format("baseline epoch {}: {}", epoch, e.what()));
      }
      optimizer_step(store, step.gradients, state, config.learning_rate);
      weighted_loss += step.loss * static_cast<double>(batch.size());
      rows_seen += batch.size();
    }
    if (!all_finite(store)) {
      throw NonFiniteLossError(fmt::format("baseline epoch {}: parameters became non-finite", epoch));
    }
    EpochRecord record;
    record.epoch = epoch;
    record.loss = weighted_loss / static_cast<double>(rows_seen);
    record.n_pos = n_pos;
    record.n_neg = n_neg;
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(record);
    log::debug("baseline epoch {} loss {:.6f}", epoch, record.loss);
  }
  result.params = std::move(store.at(kRole));
  return result;
}

Matrix predict_baseline(const MlpParams& params, const Matrix& normalized_features) {
  Matrix logits = mlp_forward(params, normalized_features);
  return logits.unaryExpr([](double z) { return sigmoid(z); });
}

void save_baseline_checkpoint(const std::filesystem::path& path, const BaselineCheckpoint& ckpt) {
  CheckpointContents contents;
  contents.kind = "baseline";
  contents.config = {{"baseline", to_json(ckpt.config)},
                     {"include_coords", ckpt.include_coords},
                     {"species_ids", ckpt.species_ids}};
  contents.params.emplace(kRole, ckpt.params);
  contents.extras.emplace("normalizer/min", Matrix(ckpt.normalizer.min));
  contents.extras.emplace("normalizer/max", Matrix(ckpt.normalizer.max));
  write_checkpoint(path, contents);
}

BaselineCheckpoint load_baseline_checkpoint(const std::filesystem::path& path) {
  CheckpointContents contents = read_checkpoint(path);
  if (contents.kind != "baseline") {
    throw ConfigError(fmt::format("{} holds a '{}' model, not a baseline", path.string(), contents.kind));
  }
  BaselineCheckpoint out;
  try {
    out.config = baseline_config_from_json(contents.config.at("baseline"));
    out.include_coords = contents.config.at("include_coords").get<bool>();
    out.species_ids = contents.config.at("species_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(fmt::format("{}: malformed config: {}", path.string(), e.what()));
  }
  auto it = contents.params.find(kRole);
  auto lo = contents.extras.find("normalizer/min");
  auto hi = contents.extras.find("normalizer/max");
  if (it == contents.params.end() || contents.params.size() != 1 || lo == contents.extras.end() ||
      hi == contents.extras.end() || lo->second.cols() != hi->second.cols()) {
    throw CorruptCheckpointError(fmt::format("{}: incomplete baseline checkpoint", path.string()));
  }
  out.params = std::move(it->second);
  if (out.params.spec.output_dim != out.species_ids.size()) {
    throw ShapeMismatchError(fmt::format("{}: head width {} but {} species", path.string(),
                                         out.params.spec.output_dim, out.species_ids.size()));
  }
  out.normalizer.min = lo->second.row(0);
  out.normalizer.max = hi->second.row(0);
  return out;
}

}  // namespace hsdm
