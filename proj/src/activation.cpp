#include "hsdm/activation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::relu: return "relu";
    case Activation::leakyrelu: return "leakyrelu";
    case Activation::softplus: return "softplus";
    case Activation::silu: return "silu";
    case Activation::hardsilu: return "hardsilu";
    case Activation::sparseplus: return "sparseplus";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  for (Activation act : kAllActivations) {
    if (to_string(act) == name) return act;
  }
  throw ConfigError(fmt::format("unknown activation '{}'", name));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_cross_entropy(double logit, double label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::leakyrelu:
      return x > 0.0 ? x : kLeakyReluSlope * x;
    case Activation::softplus:
      return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    case Activation::silu:
      return x * sigmoid(x);
    case Activation::hardsilu:
      // x * relu6(x + 3) / 6
      return x * std::clamp((x + 3.0) / 6.0, 0.0, 1.0);
    case Activation::sparseplus:
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return x;
      return 0.25 * (x + 1.0) * (x + 1.0);
  }
  return x;
}

double activate_derivative(Activation act, double x) {
  switch (act) {
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::leakyrelu:
      return x > 0.0 ? 1.0 : kLeakyReluSlope;
    case Activation::softplus:
      return sigmoid(x);
    case Activation::silu: {
      const double s = sigmoid(x);
      return s + x * s * (1.0 - s);
    }
    case Activation::hardsilu:
      if (x <= -3.0) return 0.0;
      if (x >= 3.0) return 1.0;
      return (2.0 * x + 3.0) / 6.0;
    case Activation::sparseplus:
      if (x <= -1.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return 0.5 * (x + 1.0);
  }
  return 1.0;
}

Matrix activate(Activation act, const Matrix& x) {
  return x.unaryExpr([act](double v) { return activate(act, v); });
}

Matrix activate_derivative(Activation act, const Matrix& x) {
  return x.unaryExpr([act](double v) { return activate_derivative(act, v); });
}

}  // namespace hsdm
