#pragma once

// Heterogeneous graph with named node sets and directed, typed edge sets.
//
// Graphs are values: every mutator returns a new graph and leaves the
// receiver untouched. Dense feature matrices are stored row-per-element.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hsdm/matrix.hpp"

namespace hsdm {

/// Canonical set names. Parameter roles are keyed on these.
namespace names {
inline constexpr std::string_view kLocation = "location";
inline constexpr std::string_view kSpecies = "species";
inline constexpr std::string_view kDetL2S = "det_l2s";
inline constexpr std::string_view kDetS2L = "det_s2l";
inline constexpr std::string_view kNondetL2S = "nondet_l2s";
inline constexpr std::string_view kNondetS2L = "nondet_s2l";
}  // namespace names

using Index = std::size_t;

struct NodeSet {
  std::string name;
  Index count = 0;
  Matrix features;  // count x feature_dim

  NodeSet() = default;
  NodeSet(std::string name, Index count, Matrix features);

  Index feature_dim() const { return static_cast<Index>(features.cols()); }
};

struct EdgeSet {
  std::string name;
  std::string sender_set;
  std::string receiver_set;
  std::vector<Index> senders;
  std::vector<Index> receivers;
  Matrix features;  // edge_count x edge_feature_dim

  EdgeSet() = default;
  EdgeSet(std::string name, std::string sender_set, std::string receiver_set,
          std::vector<Index> senders, std::vector<Index> receivers, Matrix features);

  /// Edge set with a single constant 1.0 feature per edge.
  static EdgeSet with_unit_features(std::string name, std::string sender_set,
                                    std::string receiver_set, std::vector<Index> senders,
                                    std::vector<Index> receivers);

  Index size() const { return senders.size(); }
  bool operator==(const EdgeSet& other) const;
};

class TypedGraph {
 public:
  TypedGraph() = default;

  /// Throws DuplicateNameError if a node set with the same name exists.
  [[nodiscard]] TypedGraph add_node_set(NodeSet set) const;

  /// Throws UnknownNodeSetError, IndexOutOfBoundsError, DuplicateEdgeError or
  /// DuplicateNameError. The reverse direction is never added implicitly.
  [[nodiscard]] TypedGraph add_edge_set(EdgeSet set) const;

  /// Returns a copy with `set` replacing (or adding) the edge set of the same name.
  [[nodiscard]] TypedGraph with_edge_set(EdgeSet set) const;

  /// Returns a copy with the node set replaced. Existing edges must stay in bounds.
  [[nodiscard]] TypedGraph with_node_set(NodeSet set) const;

  [[nodiscard]] TypedGraph without_edge_set(std::string_view name) const;

  bool has_node_set(std::string_view name) const;
  bool has_edge_set(std::string_view name) const;
  const NodeSet& node_set(std::string_view name) const;
  const EdgeSet& edge_set(std::string_view name) const;

  const std::map<std::string, NodeSet, std::less<>>& node_sets() const { return node_sets_; }
  const std::map<std::string, EdgeSet, std::less<>>& edge_sets() const { return edge_sets_; }

  /// Re-checks every invariant; throws on the first violation.
  void validate() const;

 private:
  std::map<std::string, NodeSet, std::less<>> node_sets_;
  std::map<std::string, EdgeSet, std::less<>> edge_sets_;
};

/// Swaps senders/receivers and sender/receiver set names; features are copied.
EdgeSet reverse_edge_set(const EdgeSet& set, std::string new_name);

}  // namespace hsdm
