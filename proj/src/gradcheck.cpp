#include "hsdm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hsdm/errors.hpp"
#include "hsdm/nceas_ingest.hpp"
#include "hsdm/trainer.hpp"

namespace hsdm {

GradcheckConfig GradcheckConfig::defaults() {
  GradcheckConfig c;
  c.model.latent_dim = 8;
  c.model.num_hidden_layers = 2;
  c.model.num_message_passing_steps = 1;
  c.model.activation = Activation::silu;
  c.region = toy_region_config(5);
  c.region.num_po_locations = 8;
  c.region.num_background = 6;
  c.region.num_pa_sites = 0;
  return c;
}

GradcheckResult run_gradcheck(const GradcheckConfig& config) {
  config.model.validate();
  if (!(config.epsilon > 0.0)) throw ConfigError("gradcheck epsilon must be positive");
  const RegionDataset dataset = generate_region(config.region).dataset;
  const SdmGraph data = build_training_graph(dataset, config.model);
  SamplingConfig sampling;
  sampling.seed = config.seed;
  const std::size_t num_species = data.graph.node_set(names::kSpecies).count;
  const auto negatives = sample_negatives(data.positives, data.num_po_locations,
                                          data.num_background_locations, num_species, sampling, 0);
  const auto batch = build_epoch_batch(data.positives, negatives, config.seed, 0);
  const TypedGraph graph = epoch_message_graph(data, negatives, config.model);

  const LossFn loss = [&](Tape& tape, const ParamVars& vars) {
    return batch_loss(tape, graph, vars, config.model, batch);
  };
  ParamStore params = init_params(config.model, feature_dims(data.graph), config.seed);
  LossAndGrad analytic = value_and_grad(params, loss);
  if (config.corrupt_gradient) {
    for_each_tensor(analytic.gradients, [done = false](const std::string&, Matrix& g) mutable {
      if (!done && g.size() > 0) {
        g(0, 0) += 1e-2;
        done = true;
      }
    });
  }

  std::map<std::string, const Matrix*> grads;
  for_each_tensor(analytic.gradients,
                  [&](const std::string& name, const Matrix& g) { grads.emplace(name, &g); });

  GradcheckResult result;
  const double floor = config.absolute_tolerance / config.relative_tolerance;
  for_each_tensor(params, [&](const std::string& name, Matrix& p) {
    const Matrix& g = *grads.at(name);
    const std::size_t last = name.rfind('/');
    const std::string role = name.substr(0, name.rfind('/', last - 1));
    double& role_max = result.max_error_per_role[role];
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const double saved = p(i, j);
        p(i, j) = saved + config.epsilon;
        const double up = evaluate_loss(params, loss);
        p(i, j) = saved - config.epsilon;
        const double down = evaluate_loss(params, loss);
        p(i, j) = saved;
        const double numeric = (up - down) / (2.0 * config.epsilon);
        const double a = g(i, j);
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        role_max = std::max(role_max, err);
        if (err > result.max_error || result.entries_checked == 0) {
          result.max_error = err;
          result.worst_tensor = name;
        }
        ++result.entries_checked;
      }
    }
  });
  result.passed = result.max_error <= config.relative_tolerance;
  return result;
}

}  // namespace hsdm
