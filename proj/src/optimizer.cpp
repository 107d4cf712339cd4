#include "hsdm/optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

OptimizerState make_optimizer_state(const ParamStore& params) {
  return OptimizerState{zeros_like(params), zeros_like(params), 0};
}

namespace {

void require_like(const Matrix& a, const Matrix& b, const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatchError(fmt::format("optimizer: {} is {}x{}, expected {}x{}", what, b.rows(),
                                         b.cols(), a.rows(), a.cols()));
  }
}

void adam_update(Matrix& p, const Matrix& g, Matrix& m, Matrix& v, double lr, double c1, double c2,
                 const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
}

}  // namespace

void optimizer_step(ParamStore& params, const ParamStore& grads, OptimizerState& state,
                    double learning_rate, const AdamConfig& config) {
  for (const auto& [role, mlp] : params) {
    const auto g = grads.find(role);
    const auto m = state.first_moment.find(role);
    const auto v = state.second_moment.find(role);
    if (g == grads.end() || m == state.first_moment.end() || v == state.second_moment.end()) {
      throw ShapeMismatchError(fmt::format("optimizer: role '{}' missing from grads or state", role));
    }
    if (g->second.layers.size() != mlp.layers.size() ||
        m->second.layers.size() != mlp.layers.size() ||
        v->second.layers.size() != mlp.layers.size()) {
      throw ShapeMismatchError(fmt::format("optimizer: role '{}' layer count differs", role));
    }
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      require_like(mlp.layers[l].weight, g->second.layers[l].weight, role + " weight grad");
      require_like(mlp.layers[l].bias, g->second.layers[l].bias, role + " bias grad");
      require_like(mlp.layers[l].weight, m->second.layers[l].weight, role + " weight moment");
      require_like(mlp.layers[l].bias, m->second.layers[l].bias, role + " bias moment");
    }
  }
  if (grads.size() != params.size()) {
    throw ShapeMismatchError("optimizer: grads contain roles absent from params");
  }

  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [role, mlp] : params) {
    const MlpParams& g = grads.at(role);
    MlpParams& m = state.first_moment.at(role);
    MlpParams& v = state.second_moment.at(role);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      adam_update(mlp.layers[l].weight, g.layers[l].weight, m.layers[l].weight, v.layers[l].weight,
                  learning_rate, c1, c2, config);
      adam_update(mlp.layers[l].bias, g.layers[l].bias, m.layers[l].bias, v.layers[l].bias,
                  learning_rate, c1, c2, config);
    }
  }
}

}  // namespace hsdm
