#include "hsdm/typed_graph.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

namespace {

void check_node_set(const NodeSet& set) {
  if (static_cast<Index>(set.features.rows()) != set.count) {
    throw ShapeMismatchError(fmt::format("node set '{}': feature rows {} != count {}", set.name,
                                         set.features.rows(), set.count));
  }
}

void check_edge_set(const EdgeSet& set, const std::map<std::string, NodeSet, std::less<>>& nodes) {
  if (set.senders.size() != set.receivers.size()) {
    throw ShapeMismatchError(fmt::format("edge set '{}': {} senders but {} receivers", set.name,
                                         set.senders.size(), set.receivers.size()));
  }
  if (static_cast<Index>(set.features.rows()) != set.size()) {
    throw ShapeMismatchError(fmt::format("edge set '{}': feature rows {} != edge count {}",
                                         set.name, set.features.rows(), set.size()));
  }
  auto sender_it = nodes.find(set.sender_set);
  if (sender_it == nodes.end()) {
    throw UnknownNodeSetError(
        fmt::format("edge set '{}': unknown sender set '{}'", set.name, set.sender_set));
  }
  auto receiver_it = nodes.find(set.receiver_set);
  if (receiver_it == nodes.end()) {
    throw UnknownNodeSetError(
        fmt::format("edge set '{}': unknown receiver set '{}'", set.name, set.receiver_set));
  }
  const Index n_send = sender_it->second.count;
  const Index n_recv = receiver_it->second.count;

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(set.size() * 2);
  for (Index k = 0; k < set.size(); ++k) {
    const Index s = set.senders[k];
    const Index r = set.receivers[k];
    if (s >= n_send) {
      throw IndexOutOfBoundsError(fmt::format("edge set '{}': sender index {} >= {} ('{}')",
                                              set.name, s, n_send, set.sender_set));
    }
    if (r >= n_recv) {
      throw IndexOutOfBoundsError(fmt::format("edge set '{}': receiver index {} >= {} ('{}')",
                                              set.name, r, n_recv, set.receiver_set));
    }
    const std::uint64_t key = static_cast<std::uint64_t>(s) * n_recv + r;
    if (!seen.insert(key).second) {
      throw DuplicateEdgeError(
          fmt::format("edge set '{}': duplicate edge ({}, {})", set.name, s, r));
    }
  }
}

}  // namespace

NodeSet::NodeSet(std::string name_, Index count_, Matrix features_)
    : name(std::move(name_)), count(count_), features(std::move(features_)) {
  check_node_set(*this);
}

EdgeSet::EdgeSet(std::string name_, std::string sender_set_, std::string receiver_set_,
                 std::vector<Index> senders_, std::vector<Index> receivers_, Matrix features_)
    : name(std::move(name_)),
      sender_set(std::move(sender_set_)),
      receiver_set(std::move(receiver_set_)),
      senders(std::move(senders_)),
      receivers(std::move(receivers_)),
      features(std::move(features_)) {}

EdgeSet EdgeSet::with_unit_features(std::string name, std::string sender_set,
                                    std::string receiver_set, std::vector<Index> senders,
                                    std::vector<Index> receivers) {
  Matrix features = Matrix::Ones(static_cast<Eigen::Index>(senders.size()), 1);
  return EdgeSet(std::move(name), std::move(sender_set), std::move(receiver_set),
                 std::move(senders), std::move(receivers), std::move(features));
}

bool EdgeSet::operator==(const EdgeSet& other) const {
  return name == other.name && sender_set == other.sender_set &&
         receiver_set == other.receiver_set && senders == other.senders &&
         receivers == other.receivers && features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features;
}

TypedGraph TypedGraph::add_node_set(NodeSet set) const {
  if (node_sets_.contains(set.name)) {
    throw DuplicateNameError(fmt::format("node set '{}' already present", set.name));
  }
  check_node_set(set);
  TypedGraph out = *this;
  std::string key = set.name;
  out.node_sets_.emplace(std::move(key), std::move(set));
  return out;
}

TypedGraph TypedGraph::add_edge_set(EdgeSet set) const {
  if (edge_sets_.contains(set.name)) {
    throw DuplicateNameError(fmt::format("edge set '{}' already present", set.name));
  }
  check_edge_set(set, node_sets_);
  TypedGraph out = *this;
  std::string key = set.name;
  out.edge_sets_.emplace(std::move(key), std::move(set));
  return out;
}

TypedGraph TypedGraph::with_edge_set(EdgeSet set) const {
  check_edge_set(set, node_sets_);
  TypedGraph out = *this;
  out.edge_sets_.insert_or_assign(set.name, std::move(set));
  return out;
}

TypedGraph TypedGraph::with_node_set(NodeSet set) const {
  check_node_set(set);
  TypedGraph out = *this;
  out.node_sets_.insert_or_assign(set.name, std::move(set));
  for (const auto& [name, edges] : out.edge_sets_) check_edge_set(edges, out.node_sets_);
  return out;
}

TypedGraph TypedGraph::without_edge_set(std::string_view name) const {
  TypedGraph out = *this;
  if (auto it = out.edge_sets_.find(name); it != out.edge_sets_.end()) out.edge_sets_.erase(it);
  return out;
}

bool TypedGraph::has_node_set(std::string_view name) const { return node_sets_.contains(name); }

bool TypedGraph::has_edge_set(std::string_view name) const { return edge_sets_.contains(name); }

const NodeSet& TypedGraph::node_set(std::string_view name) const {
  auto it = node_sets_.find(name);
  if (it == node_sets_.end()) throw UnknownNodeSetError(fmt::format("no node set '{}'", name));
  return it->second;
}

const EdgeSet& TypedGraph::edge_set(std::string_view name) const {
  auto it = edge_sets_.find(name);
  if (it == edge_sets_.end()) throw MissingEdgeSetError(fmt::format("no edge set '{}'", name));
  return it->second;
}

void TypedGraph::validate() const {
  for (const auto& [name, set] : node_sets_) {
    if (name != set.name) throw Error(fmt::format("node set key '{}' != name '{}'", name, set.name));
    check_node_set(set);
  }
  for (const auto& [name, set] : edge_sets_) {
    if (name != set.name) throw Error(fmt::format("edge set key '{}' != name '{}'", name, set.name));
    check_edge_set(set, node_sets_);
  }
}

EdgeSet reverse_edge_set(const EdgeSet& set, std::string new_name) {
  return EdgeSet(std::move(new_name), set.receiver_set, set.sender_set, set.receivers,
                 set.senders, set.features);
}

}  // namespace hsdm
