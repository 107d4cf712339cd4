#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "hsdm/errors.hpp"
#include "hsdm/evaluator.hpp"
#include "hsdm/synthetic.hpp"
#include "hsdm/trainer.hpp"
#include "support.hpp"

using namespace hsdm;
using test_support::bitwise_equal;
using test_support::random_matrix;
using test_support::read_text;
using test_support::TempDir;

namespace {

// P(pos > neg) + 0.5 P(tie) over every positive/negative pair.
double brute_force_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

TypedGraph train_like_graph(std::mt19937_64& rng) {
  const EdgeSet det = EdgeSet::with_unit_features("det_l2s", "location", "species", {0, 3, 5, 7, 9}, {0, 1, 1, 2, 0});
  return TypedGraph()
      .add_node_set(NodeSet("location", 10, random_matrix(10, 3, rng)))
      .add_node_set(NodeSet("species", 3, Matrix::Identity(3, 3)))
      .add_edge_set(det)
      .add_edge_set(reverse_edge_set(det, "det_s2l"));
}

ModelConfig small_model(Direction dir = Direction::one_way) {
  ModelConfig c;
  c.latent_dim = 6;
  c.direction = dir;
  c.activation = Activation::silu;
  return c;
}

}  // namespace

TEST_CASE("auc_roc fixed examples") {
  CHECK(auc_roc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
  CHECK(auc_roc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<int>{1, 0, 1}) == 0.5);
  CHECK(auc_roc(std::vector<double>{0.9, 0.2, 0.5, 0.1}, std::vector<int>{1, 1, 0, 0}) == 0.75);
}

TEST_CASE("auc_roc label errors") {
  CHECK_THROWS_AS(auc_roc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DegenerateLabelsError);
  CHECK_THROWS_AS(auc_roc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), DegenerateLabelsError);
  CHECK_THROWS_AS(auc_roc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ShapeMismatchError);
  CHECK_THROWS_AS(auc_roc(std::vector<double>{0.1, 0.2}, std::vector<int>{2, 0}), ConfigError);
}

TEST_CASE("auc_roc equals the pairwise statistic on random instances with ties") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
    const int levels = std::uniform_int_distribution<int>(1, 8)(rng);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::uniform_int_distribution<int>(0, levels)(rng) * 0.25;
      y[i] = std::bernoulli_distribution(0.4)(rng) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(std::abs(auc_roc(s, y) - brute_force_auc(s, y)) <= 1e-12);
  }
}

TEST_CASE("auc_roc is rank based and complementary") {
  std::mt19937_64 rng(5);
  std::vector<double> s(30), t(30);
  std::vector<int> y(30), flipped(30);
  for (std::size_t i = 0; i < 30; ++i) {
    s[i] = std::normal_distribution<double>()(rng);
    t[i] = std::exp(3.0 * s[i]) + 1.0;
    y[i] = i % 3 == 0 ? 1 : 0;
    flipped[i] = 1 - y[i];
  }
  CHECK(auc_roc(s, y) == doctest::Approx(auc_roc(t, y)).epsilon(1e-15));
  CHECK(auc_roc(s, y) + auc_roc(s, flipped) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("build_test_graph appends isolated locations") {
  std::mt19937_64 rng(1);
  const TypedGraph g = train_like_graph(rng);
  const TestGraph t = build_test_graph(g, random_matrix(4, 3, rng));
  CHECK(t.graph.node_set("location").count == 14);
  CHECK(t.test_locations == IndexRange{10, 14});
  for (const auto& [name, es] : g.edge_sets()) CHECK(t.graph.edge_set(name) == es);
  CHECK(bitwise_equal(t.graph.node_set("location").features.topRows(10), g.node_set("location").features));

  const TestGraph empty = build_test_graph(g, Matrix(0, 3));
  CHECK(empty.test_locations.empty());
  CHECK(empty.graph.node_set("location").count == 10);

  CHECK_THROWS_AS(build_test_graph(g, Matrix::Zero(2, 4)), ShapeMismatchError);
}

TEST_CASE("predictions are probabilities and depend only on each row") {
  std::mt19937_64 rng(2);
  const TypedGraph g = train_like_graph(rng);
  for (Direction dir : {Direction::one_way, Direction::bidirectional}) {
    const ModelConfig c = small_model(dir);
    const ParamStore p = init_params(c, feature_dims(g), 3);
    Matrix test = random_matrix(5, 3, rng);
    test.row(4) = test.row(1);
    const Matrix probs = predict_matrix(p, c, build_test_graph(g, test));
    CHECK(probs.rows() == 5);
    CHECK(probs.cols() == 3);
    CHECK(probs.minCoeff() > 0.0);
    CHECK(probs.maxCoeff() < 1.0);
    CHECK(bitwise_equal(probs.row(1), probs.row(4)));

    // Appending in a different order permutes the rows only.
    const std::vector<Eigen::Index> perm = {3, 0, 4, 2, 1};
    Matrix shuffled(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i) shuffled.row(i) = test.row(perm[i]);
    const Matrix probs2 = predict_matrix(p, c, build_test_graph(g, shuffled));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(bitwise_equal(probs2.row(i), probs.row(perm[i])));
  }
}

TEST_CASE("evaluate_scores skips single-class and unlabelled species") {
  const Matrix scores = (Matrix(4, 3) << 0.9, 0.1, 0.3, 0.2, 0.5, 0.3, 0.5, 0.7, 0.3, 0.1, 0.2, 0.3).finished();
  Eigen::MatrixXi labels(4, 3);
  labels << 1, 0, -1, 1, 0, -1, 0, 0, -1, 0, 0, -1;
  const EvalReport r = evaluate_scores(scores, labels, {"a", "b", "c"}, "XX", "gnn");
  CHECK(r.n_species_scored == 1);
  REQUIRE(r.mean_auc.has_value());
  CHECK(*r.mean_auc == 0.75);
  CHECK(r.skipped().size() == 2);
  CHECK(r.per_species[1].skip_reason == "absent at every test site");
  CHECK(r.per_species[2].skip_reason == "no presence-absence labels");

  const auto j = report_to_json(r);
  CHECK(j["region"] == "XX");
  CHECK(j["per_species"][0]["auc"] == 0.75);
  CHECK(j["per_species"][1]["skipped"] == "absent at every test site");
  CHECK(j["mean_auc"] == 0.75);

  Eigen::MatrixXi none = Eigen::MatrixXi::Zero(4, 3);
  const EvalReport empty = evaluate_scores(scores, none, {"a", "b", "c"}, "XX", "gnn");
  CHECK_FALSE(empty.mean_auc.has_value());
  CHECK(report_to_json(empty)["mean_auc"].is_null());
}

TEST_CASE("reports are written as json and csv") {
  TempDir dir;
  const Matrix scores = (Matrix(2, 2) << 0.9, 0.1, 0.2, 0.5).finished();
  Eigen::MatrixXi labels(2, 2);
  labels << 1, 1, 0, 1;
  const EvalReport r = evaluate_scores(scores, labels, {"a", "b"}, "XX", "baseline");
  write_report_json(dir / "r.json", r);
  write_report_csv(dir / "r.csv", r);
  const auto j = nlohmann::json::parse(read_text(dir / "r.json"));
  CHECK(j["model"] == "baseline");
  CHECK(j["n_species_scored"] == 1);
  CHECK(read_text(dir / "r.csv") == "species_id,auc,skipped\na,1,\nb,,present at every test site\n");
}

TEST_CASE("permuting test rows leaves every AUC unchanged") {
  std::mt19937_64 rng(8);
  const TypedGraph g = train_like_graph(rng);
  const ModelConfig c = small_model();
  const ParamStore p = init_params(c, feature_dims(g), 5);
  const Matrix test = random_matrix(12, 3, rng);
  Eigen::MatrixXi labels(12, 3);
  for (Eigen::Index i = 0; i < 12; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) labels(i, j) = (i + j) % 3 == 0 ? 1 : 0;
  }
  const std::vector<std::string> ids = {"a", "b", "c"};
  const EvalReport a = evaluate_region(p, c, g, ids, test, labels, "XX");

  std::vector<Eigen::Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix test2(12, 3);
  Eigen::MatrixXi labels2(12, 3);
  for (Eigen::Index i = 0; i < 12; ++i) {
    test2.row(i) = test.row(perm[i]);
    labels2.row(i) = labels.row(perm[i]);
  }
  const EvalReport b = evaluate_region(p, c, g, ids, test2, labels2, "XX");
  for (std::size_t s = 0; s < 3; ++s) CHECK(*a.per_species[s].auc == *b.per_species[s].auc);
}

TEST_CASE("a trained model ranks the separable toy region") {
  SyntheticRegionConfig rc = toy_region_config(2);
  rc.steepness = 12.0;
  rc.num_po_locations = 80;
  rc.num_background = 80;
  rc.num_pa_sites = 120;
  const SyntheticRegion synthetic = generate_region(rc);
  const RegionDataset& region = synthetic.dataset;

  TrainConfig t;
  t.learning_rate = 0.01;
  t.num_epochs = 200;
  t.model.latent_dim = 16;
  t.model.activation = Activation::silu;
  t.sampling.proportion_from_po = 0.5;
  t.seed = 1;
  const SdmGraph data = build_training_graph(region, t.model);
  const TrainResult r = train(data, t);
  const Matrix test = test_location_features(region, data);
  const EvalReport report = evaluate_region(r.params, t.model, inference_message_graph(data, t), data.species_ids,
                                            test, region.pa_test.labels, region.region_code);
  REQUIRE(report.mean_auc.has_value());
  CHECK(*report.mean_auc >= 0.9);

  // Detected locations score above the locations least like them.
  const Matrix probs = predict_matrix(r.params, t.model, build_test_graph(data.graph, test));
  for (Eigen::Index s = 0; s < probs.cols(); ++s) {
    Eigen::Index best = 0, worst = 0;
    const Eigen::VectorXd suit = synthetic.pa_suitability.col(s);
    suit.maxCoeff(&best);
    suit.minCoeff(&worst);
    CHECK(probs(best, s) > probs(worst, s));
  }
}
