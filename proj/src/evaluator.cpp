#include "hsdm/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "hsdm/activation.hpp"
#include "hsdm/errors.hpp"

namespace hsdm {

TestGraph build_test_graph(const TypedGraph& train_graph, const Matrix& test_location_features) {
  const NodeSet& locations = train_graph.node_set(names::kLocation);
  TestGraph out{train_graph, {locations.count, locations.count}};
  if (test_location_features.rows() == 0) return out;
  if (test_location_features.cols() != locations.features.cols()) {
    throw ShapeMismatchError(fmt::format("test locations have {} features, training locations {}",
                                         test_location_features.cols(), locations.features.cols()));
  }
  Matrix features(locations.features.rows() + test_location_features.rows(), locations.features.cols());
  features.topRows(locations.features.rows()) = locations.features;
  features.bottomRows(test_location_features.rows()) = test_location_features;
  const Index total = locations.count + static_cast<Index>(test_location_features.rows());
  out.graph = train_graph.with_node_set(NodeSet(locations.name, total, std::move(features)));
  out.test_locations.end = total;
  return out;
}

Matrix score_matrix(const ParamStore& params, const ModelConfig& config, const TestGraph& test) {
  const LatentGraph latent = run_message_passing(test.graph, params, config);
  const Matrix& locations = latent.nodes.at(std::string(names::kLocation));
  const Matrix& species = latent.nodes.at(std::string(names::kSpecies));
  const IndexRange r = test.test_locations;
  if (r.end > static_cast<Index>(locations.rows()) || r.begin > r.end) {
    throw IndexOutOfBoundsError(fmt::format("test range [{}, {}) outside {} locations", r.begin,
                                            r.end, locations.rows()));
  }
  return locations.middleRows(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size())) *
         species.transpose();
}

Matrix predict_matrix(const ParamStore& params, const ModelConfig& config, const TestGraph& test) {
  return score_matrix(params, config, test).unaryExpr([](double z) { return sigmoid(z); });
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeMismatchError(fmt::format("auc_roc: {} scores but {} labels", scores.size(), labels.size()));
  }
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ConfigError(fmt::format("auc_roc: label {} is not 0/1", y));
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DegenerateLabelsError(n_pos == 0 ? "no positive labels" : "no negative labels");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives, doubled to stay integral.
  std::size_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const std::size_t twice_avg_rank = (i + 1) + j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum += twice_avg_rank;
    }
    i = j;
  }
  const double u = (static_cast<double>(twice_rank_sum) - static_cast<double>(n_pos * (n_pos + 1))) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<SpeciesAuc> EvalReport::skipped() const {
  std::vector<SpeciesAuc> out;
  for (const auto& s : per_species) {
    if (!s.auc) out.push_back(s);
  }
  return out;
}

EvalReport evaluate_scores(const Matrix& scores, const Eigen::MatrixXi& labels,
                           const std::vector<std::string>& species_ids, std::string region,
                           std::string model) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols() ||
      static_cast<std::size_t>(scores.cols()) != species_ids.size()) {
    throw ShapeMismatchError(fmt::format("scores {}x{}, labels {}x{}, {} species", scores.rows(),
                                         scores.cols(), labels.rows(), labels.cols(), species_ids.size()));
  }
  EvalReport report{std::move(region), std::move(model), {}, std::nullopt, 0};
  double total = 0.0;
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    SpeciesAuc entry{species_ids[static_cast<std::size_t>(j)], std::nullopt, {}};
    std::vector<double> s;
    std::vector<int> y;
    bool missing = false;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      if (labels(i, j) < 0) {
        missing = true;
        break;
      }
      s.push_back(scores(i, j));
      y.push_back(labels(i, j));
    }
    if (missing) {
      entry.skip_reason = "no presence-absence labels";
    } else if (s.empty()) {
      entry.skip_reason = "no test sites";
    } else {
      try {
        entry.auc = auc_roc(s, y);
        total += *entry.auc;
        ++report.n_species_scored;
      } catch (const DegenerateLabelsError&) {
        const bool all_present = std::all_of(y.begin(), y.end(), [](int v) { return v == 1; });
        entry.skip_reason = all_present ? "present at every test site" : "absent at every test site";
      }
    }
    report.per_species.push_back(std::move(entry));
  }
  if (report.n_species_scored > 0) report.mean_auc = total / static_cast<double>(report.n_species_scored);
  return report;
}

EvalReport evaluate_region(const ParamStore& params, const ModelConfig& config,
                           const TypedGraph& message_graph,
                           const std::vector<std::string>& species_ids,
                           const Matrix& test_location_features, const Eigen::MatrixXi& labels,
                           std::string region, std::string model) {
  if (labels.rows() != test_location_features.rows()) {
    throw ShapeMismatchError(fmt::format("{} label rows for {} test sites", labels.rows(),
                                         test_location_features.rows()));
  }
  const TestGraph test = build_test_graph(message_graph, test_location_features);
  // Ranking on logits avoids ties introduced when the sigmoid saturates.
  const Matrix scores = score_matrix(params, config, test);
  return evaluate_scores(scores, labels, species_ids, std::move(region), std::move(model));
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json per_species = nlohmann::json::array();
  for (const auto& s : report.per_species) {
    if (s.auc) {
      per_species.push_back({{"species_id", s.species_id}, {"auc", *s.auc}});
    } else {
      per_species.push_back({{"species_id", s.species_id}, {"skipped", s.skip_reason}});
    }
  }
  return {{"region", report.region},
          {"model", report.model},
          {"per_species", per_species},
          {"mean_auc", report.mean_auc ? nlohmann::json(*report.mean_auc) : nlohmann::json(nullptr)},
          {"n_species_scored", report.n_species_scored}};
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  return out;
}

}  // namespace

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
  auto out = open_output(path);
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw IoError(fmt::format("short write to {}", path.string()));
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = open_output(path);
  out << "species_id,auc,skipped\n";
  for (const auto& s : report.per_species) {
    if (s.auc) {
      out << fmt::format("{},{:.17g},\n", s.species_id, *s.auc);
    } else {
      out << fmt::format("{},,{}\n", s.species_id, s.skip_reason);
    }
  }
  if (!out) throw IoError(fmt::format("short write to {}", path.string()));
}

}  // namespace hsdm
