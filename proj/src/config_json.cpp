#include "hsdm/config_json.hpp"

#include <initializer_list>
#include <string_view>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

using nlohmann::json;

namespace {

void require_object(const json& j, std::string_view what,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", what));
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(fmt::format("{}: unknown key '{}'", what, key));
  }
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback, std::string_view what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(fmt::format("{}.{}: expected a non-negative integer", what, key));
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& j, const char* key, std::uint64_t fallback, std::string_view what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(fmt::format("{}.{}: expected an integer", what, key));
  return v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<long long>());
}

double get_real(const json& j, const char* key, double fallback, std::string_view what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("{}.{}: expected a number", what, key));
  return v.get<double>();
}

bool get_bool(const json& j, const char* key, bool fallback, std::string_view what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(fmt::format("{}.{}: expected true/false", what, key));
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, std::string fallback, std::string_view what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(fmt::format("{}.{}: expected a string", what, key));
  return v.get<std::string>();
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"num_hidden_layers", c.num_hidden_layers},
          {"num_message_passing_steps", c.num_message_passing_steps},
          {"direction", std::string(to_string(c.direction))},
          {"include_negative_edges", c.include_negative_edges},
          {"aggregation", std::string(to_string(c.aggregation))},
          {"activation", std::string(to_string(c.activation))},
          {"node_update_input", std::string(to_string(c.node_update_input))}};
}

json to_json(const SamplingConfig& c) {
  json j = {{"strategy", std::string(to_string(c.strategy))},
            {"k_locations", c.k_locations},
            {"seed", c.seed}};
  if (c.negatives_per_epoch.mode == NegativeCount::Mode::fixed) {
    j["negatives_per_epoch"] = c.negatives_per_epoch.n;
  } else {
    j["negatives_per_epoch"] = "match_positive_count";
  }
  if (c.random_proportion) {
    j["proportion_from_po"] = "random";
  } else {
    j["proportion_from_po"] = c.proportion_from_po;
  }
  return j;
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"num_epochs", c.num_epochs},
          {"seed", c.seed},                   {"checkpoint_every", c.checkpoint_every},
          {"sampling", to_json(c.sampling)},  {"model", to_json(c.model)}};
}

json to_json(const BaselineConfig& c) {
  return {{"hidden_dim", c.hidden_dim},
          {"num_layers", c.num_layers},
          {"background_mix_ratio", c.background_mix_ratio},
          {"noise_scale", c.noise_scale},
          {"learning_rate", c.learning_rate},
          {"num_epochs", c.num_epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"activation", std::string(to_string(c.activation))}};
}

json to_json(const IngestOptions& c) {
  return {{"normalize", c.normalize}, {"include_coords", c.include_coords}};
}

json to_json(const FeatureDims& c) {
  return {{"location", c.location}, {"species", c.species}, {"edge", c.edge}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  constexpr std::string_view what = "model";
  require_object(j, what,
                 {"latent_dim", "num_hidden_layers", "num_message_passing_steps", "direction",
                  "include_negative_edges", "aggregation", "activation", "node_update_input"});
  c.latent_dim = get_count(j, "latent_dim", c.latent_dim, what);
  c.num_hidden_layers = get_count(j, "num_hidden_layers", c.num_hidden_layers, what);
  c.num_message_passing_steps = get_count(j, "num_message_passing_steps", c.num_message_passing_steps, what);
  c.direction = parse_direction(get_string(j, "direction", std::string(to_string(c.direction)), what));
  c.include_negative_edges = get_bool(j, "include_negative_edges", c.include_negative_edges, what);
  c.aggregation = parse_aggregation(get_string(j, "aggregation", std::string(to_string(c.aggregation)), what));
  c.activation = parse_activation(get_string(j, "activation", std::string(to_string(c.activation)), what));
  c.node_update_input = parse_node_update_input(
      get_string(j, "node_update_input", std::string(to_string(c.node_update_input)), what));
  c.validate();
  return c;
}

SamplingConfig sampling_config_from_json(const json& j, SamplingConfig c) {
  constexpr std::string_view what = "sampling";
  require_object(j, what,
                 {"strategy", "k_locations", "negatives_per_epoch", "proportion_from_po", "seed"});
  c.strategy = parse_sampling_strategy(get_string(j, "strategy", std::string(to_string(c.strategy)), what));
  c.k_locations = get_count(j, "k_locations", c.k_locations, what);
  if (j.contains("negatives_per_epoch")) {
    const json& v = j.at("negatives_per_epoch");
    if (v.is_string() && v.get<std::string>() == "match_positive_count") {
      c.negatives_per_epoch = NegativeCount::match_positives();
    } else if (v.is_number_integer() && v.get<long long>() >= 0) {
      c.negatives_per_epoch = NegativeCount::fixed(v.get<std::size_t>());
    } else {
      throw ConfigError("sampling.negatives_per_epoch: expected \"match_positive_count\" or a count");
    }
  }
  if (j.contains("proportion_from_po")) {
    const json& v = j.at("proportion_from_po");
    if (v.is_string() && v.get<std::string>() == "random") {
      c.random_proportion = true;
    } else if (v.is_number()) {
      c.random_proportion = false;
      c.proportion_from_po = v.get<double>();
    } else {
      throw ConfigError("sampling.proportion_from_po: expected a number in [0, 1] or \"random\"");
    }
  }
  c.seed = get_seed(j, "seed", c.seed, what);
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  constexpr std::string_view what = "train";
  require_object(j, what,
                 {"learning_rate", "num_epochs", "seed", "checkpoint_every", "sampling", "model"});
  c.learning_rate = get_real(j, "learning_rate", c.learning_rate, what);
  c.num_epochs = get_count(j, "num_epochs", c.num_epochs, what);
  c.seed = get_seed(j, "seed", c.seed, what);
  c.checkpoint_every = get_count(j, "checkpoint_every", c.checkpoint_every, what);
  if (j.contains("sampling")) c.sampling = sampling_config_from_json(j.at("sampling"), c.sampling);
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"), c.model);
  c.validate();
  return c;
}

BaselineConfig baseline_config_from_json(const json& j, BaselineConfig c) {
  constexpr std::string_view what = "baseline";
  require_object(j, what,
                 {"hidden_dim", "num_layers", "background_mix_ratio", "noise_scale", "learning_rate",
                  "num_epochs", "batch_size", "seed", "activation"});
  c.hidden_dim = get_count(j, "hidden_dim", c.hidden_dim, what);
  c.num_layers = get_count(j, "num_layers", c.num_layers, what);
  c.background_mix_ratio = get_real(j, "background_mix_ratio", c.background_mix_ratio, what);
  c.noise_scale = get_real(j, "noise_scale", c.noise_scale, what);
  c.learning_rate = get_real(j, "learning_rate", c.learning_rate, what);
  c.num_epochs = get_count(j, "num_epochs", c.num_epochs, what);
  c.batch_size = get_count(j, "batch_size", c.batch_size, what);
  c.seed = get_seed(j, "seed", c.seed, what);
  c.activation = parse_activation(get_string(j, "activation", std::string(to_string(c.activation)), what));
  c.validate();
  return c;
}

IngestOptions ingest_options_from_json(const json& j, IngestOptions c) {
  constexpr std::string_view what = "ingest";
  require_object(j, what, {"normalize", "include_coords"});
  c.normalize = get_bool(j, "normalize", c.normalize, what);
  c.include_coords = get_bool(j, "include_coords", c.include_coords, what);
  return c;
}

FeatureDims feature_dims_from_json(const json& j) {
  constexpr std::string_view what = "feature_dims";
  require_object(j, what, {"location", "species", "edge"});
  FeatureDims d;
  d.location = get_count(j, "location", 0, what);
  d.species = get_count(j, "species", 0, what);
  d.edge = get_count(j, "edge", 1, what);
  return d;
}

}  // namespace hsdm
