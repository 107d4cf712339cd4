#pragma once

#include <cstdint>

#include "hsdm/mlp.hpp"

namespace hsdm {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  ParamStore first_moment;
  ParamStore second_moment;
  std::int64_t step = 0;
};

OptimizerState make_optimizer_state(const ParamStore& params);

/// One bias-corrected adaptive-moment update, in place. Throws ShapeMismatchError
/// if grads or state do not have the structure of params.
void optimizer_step(ParamStore& params, const ParamStore& grads, OptimizerState& state,
                    double learning_rate, const AdamConfig& config = {});

}  // namespace hsdm
