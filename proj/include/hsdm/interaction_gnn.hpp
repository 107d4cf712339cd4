#pragma once

// Encode -> process -> decode interaction network over the bipartite
// location/species graph.
//
// Parameter roles:
//   embed/<set>                 one per node set and per active edge set
//   step<k>/edge/<edge set>     edge update, input [e, v_sender, v_receiver]
//   step<k>/node/<node set>     node update, input [v, agg(incoming set 1), ...]
// Processor parameters are not shared across steps. Decoding is a dot
// product and has no parameters.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hsdm/autodiff.hpp"
#include "hsdm/mlp.hpp"
#include "hsdm/typed_graph.hpp"

namespace hsdm {

enum class Direction { one_way, bidirectional };

/// Which edge latents the node update aggregates: the values entering the
/// step (simultaneous update) or the edge messages computed in the same step.
enum class NodeUpdateInput { pre_step_edges, updated_edges };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view name);
std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view name);
std::string_view to_string(NodeUpdateInput n);
NodeUpdateInput parse_node_update_input(std::string_view name);

struct ModelConfig {
  std::size_t latent_dim = 32;
  std::size_t num_hidden_layers = 2;
  std::size_t num_message_passing_steps = 1;
  Direction direction = Direction::one_way;
  bool include_negative_edges = false;
  Aggregation aggregation = Aggregation::segment_sum;
  Activation activation = Activation::relu;
  NodeUpdateInput node_update_input = NodeUpdateInput::pre_step_edges;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Input feature widths the embedders are built for.
struct FeatureDims {
  std::size_t location = 0;
  std::size_t species = 0;
  std::size_t edge = 1;
  bool operator==(const FeatureDims&) const = default;
};

struct LinkPair {
  Index location = 0;
  Index species = 0;
};

namespace role {
std::string embed(std::string_view set);
std::string edge_processor(std::size_t step, std::string_view edge_set);
std::string node_processor(std::size_t step, std::string_view node_set);
}  // namespace role

/// Edge sets used for message passing, in declaration order.
std::vector<std::string> active_edge_sets(const ModelConfig& config);
/// Active edge sets whose receiver is `node_set`, in declaration order.
std::vector<std::string> incoming_edge_sets(const ModelConfig& config, std::string_view node_set);

std::map<std::string, MlpSpec> parameter_specs(const ModelConfig& config, const FeatureDims& dims);
ParamStore init_params(const ModelConfig& config, const FeatureDims& dims, std::uint64_t seed);
/// Throws ShapeMismatchError unless `params` holds exactly the roles and shapes implied.
void check_params(const ParamStore& params, const ModelConfig& config, const FeatureDims& dims);

FeatureDims feature_dims(const TypedGraph& graph);

struct LatentGraph {
  std::map<std::string, Matrix> nodes;
  std::map<std::string, Matrix> edges;
};

struct LatentVars {
  std::map<std::string, Var> nodes;
  std::map<std::string, Var> edges;
};

// Differentiable building blocks.
LatentVars encode(Tape& tape, const TypedGraph& graph, const ParamVars& params,
                  const ModelConfig& config);
LatentVars process_step(const LatentVars& latent, const TypedGraph& graph, const ParamVars& params,
                        const ModelConfig& config, std::size_t step);
Var decode_scores(const LatentVars& latent, std::span<const LinkPair> pairs);
/// Encode, every processing step, then decode; returns an n x 1 logit column.
Var forward_scores(Tape& tape, const TypedGraph& graph, const ParamVars& params,
                   const ModelConfig& config, std::span<const LinkPair> pairs);

// Value-level API.
LatentGraph encode(const TypedGraph& graph, const ParamStore& params, const ModelConfig& config);
LatentGraph process_step(const LatentGraph& latent, const TypedGraph& graph,
                         const ParamStore& params, const ModelConfig& config, std::size_t step);
/// z = v_location . v_species per pair. Throws IndexOutOfBoundsError.
std::vector<double> decode_scores(const LatentGraph& latent, std::span<const LinkPair> pairs);
/// Node and edge latents after encoding and all processing steps.
LatentGraph run_message_passing(const TypedGraph& graph, const ParamStore& params,
                                const ModelConfig& config);
/// Raw logits for each target pair; pairs need not be edges of the graph.
std::vector<double> forward(const TypedGraph& graph, const ParamStore& params,
                            const ModelConfig& config, std::span<const LinkPair> pairs);

}  // namespace hsdm
