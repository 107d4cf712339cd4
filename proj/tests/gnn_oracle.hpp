#pragma once

// Loop-level recomputation of the message-passing model, written without the
// tape or Eigen expressions so it can serve as an independent reference.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hsdm/interaction_gnn.hpp"

namespace gnn_oracle {

using Rows = std::vector<std::vector<double>>;

inline double act(hsdm::Activation a, double x) {
  switch (a) {
    case hsdm::Activation::relu:
      return x > 0 ? x : 0.0;
    case hsdm::Activation::silu:
      return x / (1.0 + std::exp(-x));
    case hsdm::Activation::softplus:
      return std::log1p(std::exp(-std::abs(x))) + (x > 0 ? x : 0.0);
    case hsdm::Activation::leakyrelu:
      return x > 0 ? x : 0.01 * x;
    case hsdm::Activation::hardsilu: {
      const double r = std::min(std::max(x + 3.0, 0.0), 6.0);
      return x * r / 6.0;
    }
    case hsdm::Activation::sparseplus:
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return x;
      return (x + 1.0) * (x + 1.0) / 4.0;
  }
  return 0.0;
}

inline Rows to_rows(const hsdm::Matrix& m) {
  Rows out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

inline Rows mlp(const hsdm::MlpParams& p, const Rows& input) {
  Rows out;
  for (const auto& row : input) {
    std::vector<double> h = row;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      const auto& w = p.layers[l].weight;
      std::vector<double> next(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        double s = p.layers[l].bias(0, j);
        for (Eigen::Index i = 0; i < w.rows(); ++i) s += h[i] * w(i, j);
        next[j] = l + 1 < p.layers.size() ? act(p.spec.activation, s) : s;
      }
      h = std::move(next);
    }
    out.push_back(std::move(h));
  }
  return out;
}

struct Latents {
  std::map<std::string, Rows> nodes;
  std::map<std::string, Rows> edges;
};

struct EdgeDecl {
  std::string name, sender, receiver;
};

inline std::vector<EdgeDecl> active(const hsdm::ModelConfig& c) {
  const bool bi = c.direction == hsdm::Direction::bidirectional;
  std::vector<EdgeDecl> out{{"det_l2s", "location", "species"}};
  if (c.include_negative_edges) out.push_back({"nondet_l2s", "location", "species"});
  if (bi) out.push_back({"det_s2l", "species", "location"});
  if (bi && c.include_negative_edges) out.push_back({"nondet_s2l", "species", "location"});
  return out;
}

inline Latents encode(const hsdm::TypedGraph& g, const hsdm::ParamStore& p, const hsdm::ModelConfig& c) {
  Latents z;
  for (const char* n : {"location", "species"}) {
    z.nodes[n] = mlp(p.at(std::string("embed/") + n), to_rows(g.node_set(n).features));
  }
  for (const auto& e : active(c)) z.edges[e.name] = mlp(p.at("embed/" + e.name), to_rows(g.edge_set(e.name).features));
  return z;
}

inline Latents step(const Latents& z, const hsdm::TypedGraph& g, const hsdm::ParamStore& p,
                    const hsdm::ModelConfig& c, std::size_t k) {
  const std::string prefix = "step" + std::to_string(k);
  const std::size_t d = c.latent_dim;
  Latents out;
  std::map<std::string, Rows> messages;
  for (const auto& e : active(c)) {
    const auto& es = g.edge_set(e.name);
    Rows input;
    for (std::size_t i = 0; i < es.size(); ++i) {
      std::vector<double> row = z.edges.at(e.name)[i];
      const auto& s = z.nodes.at(e.sender)[es.senders[i]];
      const auto& r = z.nodes.at(e.receiver)[es.receivers[i]];
      row.insert(row.end(), s.begin(), s.end());
      row.insert(row.end(), r.begin(), r.end());
      input.push_back(row);
    }
    messages[e.name] = mlp(p.at(prefix + "/edge/" + e.name), input);
    Rows updated = z.edges.at(e.name);
    for (std::size_t i = 0; i < updated.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) updated[i][j] += messages[e.name][i][j];
    }
    out.edges[e.name] = updated;
  }
  for (const char* n : {"location", "species"}) {
    const Rows& v = z.nodes.at(n);
    Rows input = v;
    for (const auto& e : active(c)) {
      if (e.receiver != n) continue;
      const auto& es = g.edge_set(e.name);
      const Rows& src = c.node_update_input == hsdm::NodeUpdateInput::updated_edges ? messages.at(e.name)
                                                                                    : z.edges.at(e.name);
      Rows agg(v.size(), std::vector<double>(d, 0.0));
      std::vector<double> counts(v.size(), 0.0);
      for (std::size_t i = 0; i < es.size(); ++i) {
        counts[es.receivers[i]] += 1.0;
        for (std::size_t j = 0; j < d; ++j) agg[es.receivers[i]][j] += src[i][j];
      }
      if (c.aggregation == hsdm::Aggregation::segment_mean) {
        for (std::size_t r = 0; r < v.size(); ++r) {
          if (counts[r] > 0) {
            for (std::size_t j = 0; j < d; ++j) agg[r][j] /= counts[r];
          }
        }
      }
      for (std::size_t r = 0; r < v.size(); ++r) input[r].insert(input[r].end(), agg[r].begin(), agg[r].end());
    }
    const Rows update = mlp(p.at(prefix + "/node/" + n), input);
    Rows next = v;
    for (std::size_t r = 0; r < v.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) next[r][j] += update[r][j];
    }
    out.nodes[n] = next;
  }
  return out;
}

inline std::vector<double> decode(const Latents& z, const std::vector<hsdm::LinkPair>& pairs) {
  std::vector<double> out;
  for (const auto& pr : pairs) {
    const auto& a = z.nodes.at("location")[pr.location];
    const auto& b = z.nodes.at("species")[pr.species];
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    out.push_back(s);
  }
  return out;
}

inline std::vector<double> forward(const hsdm::TypedGraph& g, const hsdm::ParamStore& p,
                                   const hsdm::ModelConfig& c, const std::vector<hsdm::LinkPair>& pairs) {
  Latents z = gnn_oracle::encode(g, p, c);
  for (std::size_t k = 0; k < c.num_message_passing_steps; ++k) z = gnn_oracle::step(z, g, p, c, k);
  return gnn_oracle::decode(z, pairs);
}

inline double max_abs_diff(const Rows& a, const hsdm::Matrix& b) {
  double worst = 0.0;
  if (a.size() != static_cast<std::size_t>(b.rows())) return INFINITY;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != static_cast<std::size_t>(b.cols())) return INFINITY;
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b(i, j)));
  }
  return worst;
}

// 2 locations, 2 species, detections (0,0) and (1,1); bidirectional and
// negative edge sets added too so any configuration can run on it.
inline hsdm::TypedGraph toy_graph() {
  using namespace hsdm;
  const Matrix loc = (Matrix(2, 2) << 0.3, -0.7, -0.5, 0.9).finished();
  const EdgeSet det = EdgeSet::with_unit_features("det_l2s", "location", "species", {0, 1}, {0, 1});
  const EdgeSet nondet = EdgeSet::with_unit_features("nondet_l2s", "location", "species", {0}, {1});
  return TypedGraph()
      .add_node_set(NodeSet("location", 2, loc))
      .add_node_set(NodeSet("species", 2, Matrix::Identity(2, 2)))
      .add_edge_set(det)
      .add_edge_set(reverse_edge_set(det, "det_s2l"))
      .add_edge_set(nondet)
      .add_edge_set(reverse_edge_set(nondet, "nondet_s2l"));
}

// Parameters with non-zero biases so every term of the update is exercised.
inline hsdm::ParamStore pinned_params(const hsdm::ModelConfig& c, const hsdm::FeatureDims& dims) {
  hsdm::ParamStore p = hsdm::init_params(c, dims, 1234);
  double t = 0.0;
  for (auto& [role, m] : p) {
    for (auto& layer : m.layers) {
      for (Eigen::Index j = 0; j < layer.bias.cols(); ++j) {
        t += 1.0;
        layer.bias(0, j) = 0.1 * std::sin(t);
      }
    }
  }
  return p;
}

}  // namespace gnn_oracle
