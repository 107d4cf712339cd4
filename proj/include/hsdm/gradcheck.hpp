#pragma once

// Central finite-difference check of the training-loss gradient on a small
// generated graph, covering every parameter role of a model configuration.

#include <cstdint>
#include <map>
#include <string>

#include "hsdm/interaction_gnn.hpp"
#include "hsdm/synthetic.hpp"

namespace hsdm {

struct GradcheckConfig {
  ModelConfig model;
  SyntheticRegionConfig region;
  double epsilon = 1e-5;
  double relative_tolerance = 1e-4;
  /// Differences below this pass regardless of magnitude (gradients near zero).
  double absolute_tolerance = 1e-6;
  std::uint64_t seed = 3;
  /// Test hook: perturbs one analytic gradient entry before comparison.
  bool corrupt_gradient = false;

  /// Latent 8, smooth activation, tiny toy region.
  static GradcheckConfig defaults();
};

struct GradcheckResult {
  /// max over entries of |analytic - numeric| / max(|analytic|, |numeric|, abs_tol / rel_tol)
  double max_error = 0.0;
  std::string worst_tensor;
  std::size_t entries_checked = 0;
  std::map<std::string, double> max_error_per_role;
  bool passed = false;
};

GradcheckResult run_gradcheck(const GradcheckConfig& config);

}  // namespace hsdm
