#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hsdm/activation.hpp"
#include "hsdm/autodiff.hpp"
#include "hsdm/matrix.hpp"

namespace hsdm {

/// num_hidden_layers activated hidden layers followed by a linear output layer.
struct MlpSpec {
  std::size_t input_dim = 1;
  std::size_t hidden_dim = 1;
  std::size_t num_hidden_layers = 1;
  std::size_t output_dim = 1;
  Activation activation = Activation::relu;

  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  Matrix bias;    // 1 x fan_out
};

struct MlpParams {
  MlpSpec spec;
  std::vector<DenseLayer> layers;
};

/// Uniform variance scaling, limit sqrt(6 / (fan_in + fan_out)); zero biases.
MlpParams mlp_init(const MlpSpec& spec, std::uint64_t seed);

/// Throws ShapeMismatchError when input width differs from spec.input_dim.
Matrix mlp_forward(const MlpParams& params, const Matrix& input);

/// Parameters keyed by role name.
using ParamStore = std::map<std::string, MlpParams>;

struct MlpVars {
  Activation activation = Activation::relu;
  std::size_t input_dim = 0;
  std::vector<Var> weights;
  std::vector<Var> biases;
};

using ParamVars = std::map<std::string, MlpVars>;

Var mlp_apply(const MlpVars& mlp, Var input);

/// Records every tensor of `params` on the tape as a trainable leaf.
ParamVars bind_parameters(Tape& tape, const ParamStore& params);
/// Records every tensor as a constant; nothing upstream receives gradients.
ParamVars bind_constants(Tape& tape, const ParamStore& params);

/// Gradients accumulated on `vars` after Tape::backward, shaped like `like`.
ParamStore collect_gradients(const ParamVars& vars, const ParamStore& like);

struct LossAndGrad {
  double loss = 0.0;
  ParamStore gradients;
};

using LossFn = std::function<Var(Tape&, const ParamVars&)>;

/// Evaluates `loss` on a fresh tape and returns exact reverse-mode gradients
/// with respect to every parameter. Throws NonFiniteLossError.
LossAndGrad value_and_grad(const ParamStore& params, const LossFn& loss);

/// Evaluates `loss` without recording gradients.
double evaluate_loss(const ParamStore& params, const LossFn& loss);

/// Visits each tensor as (name, matrix); names are "<role>/<layer>/weight|bias".
void for_each_tensor(const ParamStore& store,
                     const std::function<void(const std::string&, const Matrix&)>& fn);
void for_each_tensor(ParamStore& store,
                     const std::function<void(const std::string&, Matrix&)>& fn);

std::size_t parameter_count(const ParamStore& store);
bool all_finite(const ParamStore& store);

/// Same structure with every tensor set to zero.
ParamStore zeros_like(const ParamStore& store);

/// Stable 64-bit FNV-1a of a string; used to derive per-role seeds.
std::uint64_t stable_hash(std::string_view text);

}  // namespace hsdm
