#pragma once

#include <array>
#include <string>
#include <string_view>

#include "hsdm/matrix.hpp"

namespace hsdm {

enum class Activation { relu, leakyrelu, softplus, silu, hardsilu, sparseplus };

inline constexpr std::array<Activation, 6> kAllActivations = {
    Activation::relu, Activation::leakyrelu, Activation::softplus,
    Activation::silu, Activation::hardsilu,  Activation::sparseplus};

inline constexpr double kLeakyReluSlope = 0.01;

std::string_view to_string(Activation act);
/// Throws ConfigError on an unknown name.
Activation parse_activation(std::string_view name);

double activate(Activation act, double x);
double activate_derivative(Activation act, double x);

Matrix activate(Activation act, const Matrix& x);
Matrix activate_derivative(Activation act, const Matrix& x);

/// Overflow-free logistic function.
double sigmoid(double x);

/// -[y log s(z) + (1 - y) log(1 - s(z))] in the form max(z, 0) - z y + log1p(exp(-|z|)).
double sigmoid_cross_entropy(double logit, double label);

}  // namespace hsdm
