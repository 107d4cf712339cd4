#include "hsdm/interaction_gnn.hpp"

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

std::string_view to_string(Direction d) {
  return d == Direction::one_way ? "one_way" : "bidirectional";
}

Direction parse_direction(std::string_view name) {
  if (name == "one_way") return Direction::one_way;
  if (name == "bidirectional") return Direction::bidirectional;
  throw ConfigError(fmt::format("unknown message passing direction '{}'", name));
}

std::string_view to_string(Aggregation a) {
  return a == Aggregation::segment_sum ? "segment_sum" : "segment_mean";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "segment_sum") return Aggregation::segment_sum;
  if (name == "segment_mean") return Aggregation::segment_mean;
  throw ConfigError(fmt::format("unknown aggregation '{}'", name));
}

std::string_view to_string(NodeUpdateInput n) {
  return n == NodeUpdateInput::pre_step_edges ? "pre_step_edges" : "updated_edges";
}

NodeUpdateInput parse_node_update_input(std::string_view name) {
  if (name == "pre_step_edges") return NodeUpdateInput::pre_step_edges;
  if (name == "updated_edges") return NodeUpdateInput::updated_edges;
  throw ConfigError(fmt::format("unknown node update input '{}'", name));
}

void ModelConfig::validate() const {
  if (latent_dim == 0) throw ConfigError("latent_dim must be positive");
  if (num_hidden_layers == 0) throw ConfigError("num_hidden_layers must be positive");
  if (num_message_passing_steps == 0) throw ConfigError("num_message_passing_steps must be >= 1");
}

namespace role {
std::string embed(std::string_view set) { return fmt::format("embed/{}", set); }
std::string edge_processor(std::size_t step, std::string_view edge_set) {
  return fmt::format("step{}/edge/{}", step, edge_set);
}
std::string node_processor(std::size_t step, std::string_view node_set) {
  return fmt::format("step{}/node/{}", step, node_set);
}
}  // namespace role

namespace {

struct EdgeSetInfo {
  std::string_view name;
  std::string_view sender;
  std::string_view receiver;
};

// Declaration order; aggregates are concatenated in this order.
constexpr EdgeSetInfo kEdgeSets[] = {
    {names::kDetL2S, names::kLocation, names::kSpecies},
    {names::kNondetL2S, names::kLocation, names::kSpecies},
    {names::kDetS2L, names::kSpecies, names::kLocation},
    {names::kNondetS2L, names::kSpecies, names::kLocation},
};

constexpr std::string_view kNodeSets[] = {names::kLocation, names::kSpecies};

bool is_active(const ModelConfig& config, std::string_view edge_set) {
  if (edge_set == names::kDetL2S) return true;
  if (edge_set == names::kDetS2L) return config.direction == Direction::bidirectional;
  if (edge_set == names::kNondetL2S) return config.include_negative_edges;
  if (edge_set == names::kNondetS2L) {
    return config.include_negative_edges && config.direction == Direction::bidirectional;
  }
  return false;
}

}  // namespace

std::vector<std::string> active_edge_sets(const ModelConfig& config) {
  std::vector<std::string> out;
  for (const EdgeSetInfo& info : kEdgeSets) {
    if (is_active(config, info.name)) out.emplace_back(info.name);
  }
  return out;
}

std::vector<std::string> incoming_edge_sets(const ModelConfig& config, std::string_view node_set) {
  std::vector<std::string> out;
  for (const EdgeSetInfo& info : kEdgeSets) {
    if (info.receiver == node_set && is_active(config, info.name)) out.emplace_back(info.name);
  }
  return out;
}

std::map<std::string, MlpSpec> parameter_specs(const ModelConfig& config, const FeatureDims& dims) {
  config.validate();
  const std::size_t d = config.latent_dim;
  auto spec = [&](std::size_t in) {
    return MlpSpec{in, d, config.num_hidden_layers, d, config.activation};
  };
  std::map<std::string, MlpSpec> specs;
  specs.emplace(role::embed(names::kLocation), spec(dims.location));
  specs.emplace(role::embed(names::kSpecies), spec(dims.species));
  const auto edges = active_edge_sets(config);
  for (const auto& e : edges) specs.emplace(role::embed(e), spec(dims.edge));
  for (std::size_t k = 0; k < config.num_message_passing_steps; ++k) {
    for (const auto& e : edges) specs.emplace(role::edge_processor(k, e), spec(3 * d));
    for (std::string_view n : kNodeSets) {
      const std::size_t n_in = incoming_edge_sets(config, n).size();
      specs.emplace(role::node_processor(k, n), spec((1 + n_in) * d));
    }
  }
  return specs;
}

ParamStore init_params(const ModelConfig& config, const FeatureDims& dims, std::uint64_t seed) {
  ParamStore store;
  for (const auto& [name, spec] : parameter_specs(config, dims)) {
    store.emplace(name, mlp_init(spec, seed ^ stable_hash(name)));
  }
  return store;
}

void check_params(const ParamStore& params, const ModelConfig& config, const FeatureDims& dims) {
  const auto specs = parameter_specs(config, dims);
  if (specs.size() != params.size()) {
    throw ShapeMismatchError(fmt::format("parameter store has {} roles, config requires {}",
                                         params.size(), specs.size()));
  }
  for (const auto& [name, spec] : specs) {
    auto it = params.find(name);
    if (it == params.end()) throw ShapeMismatchError(fmt::format("missing parameter role '{}'", name));
    const MlpParams& p = it->second;
    if (!(p.spec == spec)) {
      throw ShapeMismatchError(fmt::format(
          "role '{}': stored MLP ({}->{}x{}->{}) does not match required ({}->{}x{}->{})", name,
          p.spec.input_dim, p.spec.hidden_dim, p.spec.num_hidden_layers, p.spec.output_dim,
          spec.input_dim, spec.hidden_dim, spec.num_hidden_layers, spec.output_dim));
    }
    if (p.layers.size() != spec.num_hidden_layers + 1) {
      throw ShapeMismatchError(fmt::format("role '{}': wrong layer count", name));
    }
    std::size_t fan_in = spec.input_dim;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const std::size_t fan_out = l + 1 < p.layers.size() ? spec.hidden_dim : spec.output_dim;
      const DenseLayer& layer = p.layers[l];
      if (static_cast<std::size_t>(layer.weight.rows()) != fan_in ||
          static_cast<std::size_t>(layer.weight.cols()) != fan_out ||
          layer.bias.rows() != 1 || static_cast<std::size_t>(layer.bias.cols()) != fan_out) {
        throw ShapeMismatchError(fmt::format("role '{}': layer {} has wrong shape", name, l));
      }
      fan_in = fan_out;
    }
  }
}

FeatureDims feature_dims(const TypedGraph& graph) {
  FeatureDims dims;
  dims.location = graph.node_set(names::kLocation).feature_dim();
  dims.species = graph.node_set(names::kSpecies).feature_dim();
  dims.edge = graph.edge_set(names::kDetL2S).features.cols();
  return dims;
}

LatentVars encode(Tape& tape, const TypedGraph& graph, const ParamVars& params,
                  const ModelConfig& config) {
  LatentVars latent;
  for (std::string_view n : kNodeSets) {
    const NodeSet& set = graph.node_set(n);
    latent.nodes.emplace(std::string(n),
                         mlp_apply(params.at(role::embed(n)), tape.constant(set.features)));
  }
  for (const auto& e : active_edge_sets(config)) {
    if (!graph.has_edge_set(e)) {
      throw MissingEdgeSetError(fmt::format("model configuration requires edge set '{}'", e));
    }
    latent.edges.emplace(e, mlp_apply(params.at(role::embed(e)),
                                      tape.constant(graph.edge_set(e).features)));
  }
  return latent;
}

LatentVars process_step(const LatentVars& latent, const TypedGraph& graph, const ParamVars& params,
                        const ModelConfig& config, std::size_t step) {
  // Every right-hand side reads the pre-step latents, except that node updates
  // may be configured to aggregate this step's edge messages instead.
  std::map<std::string, Var> messages;
  for (const auto& e : active_edge_sets(config)) {
    const EdgeSet& edges = graph.edge_set(e);
    const Var v_send = ad::gather_rows(latent.nodes.at(edges.sender_set), edges.senders);
    const Var v_recv = ad::gather_rows(latent.nodes.at(edges.receiver_set), edges.receivers);
    const Var inputs[] = {latent.edges.at(e), v_send, v_recv};
    messages.emplace(e, mlp_apply(params.at(role::edge_processor(step, e)), ad::concat_cols(inputs)));
  }

  LatentVars next;
  for (std::string_view n : kNodeSets) {
    const Var v = latent.nodes.at(std::string(n));
    std::vector<Var> parts{v};
    const Index count = graph.node_set(n).count;
    for (const auto& e : incoming_edge_sets(config, n)) {
      const Var edge_latent = config.node_update_input == NodeUpdateInput::updated_edges
                                  ? messages.at(e)
                                  : latent.edges.at(e);
      parts.push_back(
          ad::segment_reduce(edge_latent, graph.edge_set(e).receivers, count, config.aggregation));
    }
    const Var input = parts.size() == 1 ? v : ad::concat_cols(parts);
    const Var update = mlp_apply(params.at(role::node_processor(step, n)), input);
    next.nodes.emplace(std::string(n), ad::add(v, update));
  }
  for (const auto& [e, message] : messages) {
    next.edges.emplace(e, ad::add(latent.edges.at(e), message));
  }
  return next;
}

Var decode_scores(const LatentVars& latent, std::span<const LinkPair> pairs) {
  std::vector<std::size_t> locations(pairs.size());
  std::vector<std::size_t> species(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    locations[i] = pairs[i].location;
    species[i] = pairs[i].species;
  }
  const Var v_loc = ad::gather_rows(latent.nodes.at(std::string(names::kLocation)), locations);
  const Var v_sp = ad::gather_rows(latent.nodes.at(std::string(names::kSpecies)), species);
  return ad::rowwise_dot(v_loc, v_sp);
}

Var forward_scores(Tape& tape, const TypedGraph& graph, const ParamVars& params,
                   const ModelConfig& config, std::span<const LinkPair> pairs) {
  config.validate();
  LatentVars latent = encode(tape, graph, params, config);
  for (std::size_t k = 0; k < config.num_message_passing_steps; ++k) {
    latent = process_step(latent, graph, params, config, k);
  }
  return decode_scores(latent, pairs);
}

namespace {

LatentGraph to_values(const LatentVars& vars) {
  LatentGraph out;
  for (const auto& [name, v] : vars.nodes) out.nodes.emplace(name, v.value());
  for (const auto& [name, v] : vars.edges) out.edges.emplace(name, v.value());
  return out;
}

LatentVars to_vars(Tape& tape, const LatentGraph& latent) {
  LatentVars out;
  for (const auto& [name, m] : latent.nodes) out.nodes.emplace(name, tape.constant(m));
  for (const auto& [name, m] : latent.edges) out.edges.emplace(name, tape.constant(m));
  return out;
}

}  // namespace

LatentGraph encode(const TypedGraph& graph, const ParamStore& params, const ModelConfig& config) {
  Tape tape;
  return to_values(encode(tape, graph, bind_constants(tape, params), config));
}

LatentGraph process_step(const LatentGraph& latent, const TypedGraph& graph,
                         const ParamStore& params, const ModelConfig& config, std::size_t step) {
  Tape tape;
  const ParamVars vars = bind_constants(tape, params);
  return to_values(process_step(to_vars(tape, latent), graph, vars, config, step));
}

std::vector<double> decode_scores(const LatentGraph& latent, std::span<const LinkPair> pairs) {
  const Matrix& loc = latent.nodes.at(std::string(names::kLocation));
  const Matrix& sp = latent.nodes.at(std::string(names::kSpecies));
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const LinkPair& p : pairs) {
    if (p.location >= static_cast<Index>(loc.rows()) || p.species >= static_cast<Index>(sp.rows())) {
      throw IndexOutOfBoundsError(fmt::format("decode: pair ({}, {}) outside {} locations x {} species",
                                              p.location, p.species, loc.rows(), sp.rows()));
    }
    out.push_back(loc.row(static_cast<Eigen::Index>(p.location))
                      .dot(sp.row(static_cast<Eigen::Index>(p.species))));
  }
  return out;
}

LatentGraph run_message_passing(const TypedGraph& graph, const ParamStore& params,
                                const ModelConfig& config) {
  config.validate();
  Tape tape;
  const ParamVars vars = bind_constants(tape, params);
  LatentVars latent = encode(tape, graph, vars, config);
  for (std::size_t k = 0; k < config.num_message_passing_steps; ++k) {
    latent = process_step(latent, graph, vars, config, k);
  }
  return to_values(latent);
}

std::vector<double> forward(const TypedGraph& graph, const ParamStore& params,
                            const ModelConfig& config, std::span<const LinkPair> pairs) {
  return decode_scores(run_message_passing(graph, params, config), pairs);
}

}  // namespace hsdm
