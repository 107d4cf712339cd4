#pragma once

// JSON forms of the configuration structs. Parsing is strict: unknown keys
// and wrongly typed values raise ConfigError; absent keys keep their defaults.

#include <json.hpp>

#include "hsdm/baseline_mlp.hpp"
#include "hsdm/interaction_gnn.hpp"
#include "hsdm/nceas_ingest.hpp"
#include "hsdm/negative_sampling.hpp"
#include "hsdm/trainer.hpp"

namespace hsdm {

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const SamplingConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const BaselineConfig& c);
nlohmann::json to_json(const IngestOptions& c);
nlohmann::json to_json(const FeatureDims& c);

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});
SamplingConfig sampling_config_from_json(const nlohmann::json& j, SamplingConfig base = {});
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
BaselineConfig baseline_config_from_json(const nlohmann::json& j, BaselineConfig base = {});
IngestOptions ingest_options_from_json(const nlohmann::json& j, IngestOptions base = {});
FeatureDims feature_dims_from_json(const nlohmann::json& j);

}  // namespace hsdm
