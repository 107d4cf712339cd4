#include "hsdm/mlp.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

void MlpSpec::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || num_hidden_layers == 0 || output_dim == 0) {
    throw ConfigError(fmt::format("MLP dims must be positive (in={}, hidden={}, layers={}, out={})",
                                  input_dim, hidden_dim, num_hidden_layers, output_dim));
  }
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

MlpParams mlp_init(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x6d6c70u};
  std::mt19937_64 rng(seq);

  MlpParams params{spec, {}};
  std::vector<std::size_t> widths{spec.input_dim};
  for (std::size_t l = 0; l < spec.num_hidden_layers; ++l) widths.push_back(spec.hidden_dim);
  widths.push_back(spec.output_dim);

  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(widths[l]);
    const auto fan_out = static_cast<Eigen::Index>(widths[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Matrix(fan_in, fan_out), Matrix::Zero(1, fan_out)};
    for (Eigen::Index i = 0; i < fan_in; ++i) {
      for (Eigen::Index j = 0; j < fan_out; ++j) layer.weight(i, j) = dist(rng);
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& input) {
  if (static_cast<std::size_t>(input.cols()) != params.spec.input_dim) {
    throw ShapeMismatchError(fmt::format("mlp_forward: input width {} != {}", input.cols(),
                                         params.spec.input_dim));
  }
  Tape tape;
  ParamStore single{{"mlp", params}};
  const ParamVars vars = bind_constants(tape, single);
  return mlp_apply(vars.at("mlp"), tape.constant(input)).value();
}

Var mlp_apply(const MlpVars& mlp, Var input) {
  if (static_cast<std::size_t>(input.cols()) != mlp.input_dim) {
    throw ShapeMismatchError(
        fmt::format("mlp: input width {} != {}", input.cols(), mlp.input_dim));
  }
  Var h = input;
  const std::size_t n = mlp.weights.size();
  for (std::size_t l = 0; l < n; ++l) {
    h = ad::add_row(ad::matmul(h, mlp.weights[l]), mlp.biases[l]);
    if (l + 1 < n) h = ad::activate(h, mlp.activation);
  }
  return h;
}

namespace {

ParamVars bind(Tape& tape, const ParamStore& params, bool trainable) {
  ParamVars vars;
  for (const auto& [role, mlp] : params) {
    MlpVars mv;
    mv.activation = mlp.spec.activation;
    mv.input_dim = mlp.spec.input_dim;
    for (const DenseLayer& layer : mlp.layers) {
      mv.weights.push_back(trainable ? tape.parameter(layer.weight) : tape.constant(layer.weight));
      mv.biases.push_back(trainable ? tape.parameter(layer.bias) : tape.constant(layer.bias));
    }
    vars.emplace(role, std::move(mv));
  }
  return vars;
}

}  // namespace

ParamVars bind_parameters(Tape& tape, const ParamStore& params) { return bind(tape, params, true); }

ParamVars bind_constants(Tape& tape, const ParamStore& params) { return bind(tape, params, false); }

ParamStore collect_gradients(const ParamVars& vars, const ParamStore& like) {
  ParamStore grads = like;
  for (auto& [role, mlp] : grads) {
    const MlpVars& mv = vars.at(role);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      mlp.layers[l].weight = mv.weights[l].grad();
      mlp.layers[l].bias = mv.biases[l].grad();
    }
  }
  return grads;
}

LossAndGrad value_and_grad(const ParamStore& params, const LossFn& loss) {
  Tape tape;
  const ParamVars vars = bind_parameters(tape, params);
  const Var out = loss(tape, vars);
  if (out.rows() != 1 || out.cols() != 1) {
    throw ShapeMismatchError(
        fmt::format("loss must be 1x1, got {}x{}", out.rows(), out.cols()));
  }
  const double value = out.value()(0, 0);
  if (!std::isfinite(value)) throw NonFiniteLossError(fmt::format("loss is {}", value));
  tape.backward(out);
  return LossAndGrad{value, collect_gradients(vars, params)};
}

double evaluate_loss(const ParamStore& params, const LossFn& loss) {
  Tape tape;
  const ParamVars vars = bind_constants(tape, params);
  return loss(tape, vars).value()(0, 0);
}

void for_each_tensor(const ParamStore& store,
                     const std::function<void(const std::string&, const Matrix&)>& fn) {
  for (const auto& [role, mlp] : store) {
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      fn(fmt::format("{}/{}/weight", role, l), mlp.layers[l].weight);
      fn(fmt::format("{}/{}/bias", role, l), mlp.layers[l].bias);
    }
  }
}

void for_each_tensor(ParamStore& store,
                     const std::function<void(const std::string&, Matrix&)>& fn) {
  for (auto& [role, mlp] : store) {
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      fn(fmt::format("{}/{}/weight", role, l), mlp.layers[l].weight);
      fn(fmt::format("{}/{}/bias", role, l), mlp.layers[l].bias);
    }
  }
}

std::size_t parameter_count(const ParamStore& store) {
  std::size_t n = 0;
  for_each_tensor(store, [&n](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool all_finite(const ParamStore& store) {
  bool ok = true;
  for_each_tensor(store, [&ok](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

ParamStore zeros_like(const ParamStore& store) {
  ParamStore out = store;
  for_each_tensor(out, [](const std::string&, Matrix& m) { m.setZero(); });
  return out;
}

}  // namespace hsdm
