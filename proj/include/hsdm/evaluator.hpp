#pragma once

// Presence-absence evaluation. Test locations are appended to the training
// graph as isolated location nodes, every (test location, species) pair is
// scored in a single forward pass, and AUC-ROC is computed per species.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsdm/interaction_gnn.hpp"
#include "hsdm/typed_graph.hpp"

namespace hsdm {

struct IndexRange {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool operator==(const IndexRange&) const = default;
};

struct TestGraph {
  TypedGraph graph;
  IndexRange test_locations;
};

/// Appends test rows to the location node set; edge sets are untouched.
/// Throws ShapeMismatchError when the feature width differs.
TestGraph build_test_graph(const TypedGraph& train_graph, const Matrix& test_location_features);

/// Raw logits v_location . v_species for every test location (rows) and species (columns).
Matrix score_matrix(const ParamStore& params, const ModelConfig& config, const TestGraph& test);
/// Sigmoid of score_matrix.
Matrix predict_matrix(const ParamStore& params, const ModelConfig& config, const TestGraph& test);

/// Mann-Whitney statistic via average ranks: P(pos > neg) + 0.5 P(tie).
/// Throws ShapeMismatchError, DegenerateLabelsError (single class).
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct SpeciesAuc {
  std::string species_id;
  std::optional<double> auc;
  std::string skip_reason;  // set when auc is empty
};

struct EvalReport {
  std::string region;
  std::string model;
  std::vector<SpeciesAuc> per_species;
  /// Unweighted mean over scored species; empty when none could be scored.
  std::optional<double> mean_auc;
  std::size_t n_species_scored = 0;

  std::vector<SpeciesAuc> skipped() const;
};

/// `scores` and `labels` are n_sites x n_species; label -1 marks a species with no test column.
EvalReport evaluate_scores(const Matrix& scores, const Eigen::MatrixXi& labels,
                           const std::vector<std::string>& species_ids, std::string region,
                           std::string model);

/// Scores the test sites through `message_graph` and reports per-species AUC.
EvalReport evaluate_region(const ParamStore& params, const ModelConfig& config,
                           const TypedGraph& message_graph,
                           const std::vector<std::string>& species_ids,
                           const Matrix& test_location_features, const Eigen::MatrixXi& labels,
                           std::string region, std::string model = "gnn");

nlohmann::json report_to_json(const EvalReport& report);
void write_report_json(const std::filesystem::path& path, const EvalReport& report);
/// species_id,auc,skipped
void write_report_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace hsdm
