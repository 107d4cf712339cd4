#include <cmath>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "hsdm/errors.hpp"
#include "hsdm/synthetic.hpp"
#include "hsdm/trainer.hpp"
#include "support.hpp"

using namespace hsdm;
using test_support::bitwise_equal;
using test_support::read_text;
using test_support::TempDir;
using test_support::write_text;

namespace {

RegionDataset separable_region() {
  SyntheticRegionConfig c;
  c.num_species = 5;
  c.num_env = 2;
  c.num_po_locations = 50;
  c.num_background = 30;
  c.num_pa_sites = 20;
  c.seed = 4;
  return generate_region(c).dataset;
}

TrainConfig small_train(std::size_t epochs = 10) {
  TrainConfig t;
  t.learning_rate = 0.01;
  t.num_epochs = epochs;
  t.model.latent_dim = 8;
  t.model.num_hidden_layers = 2;
  t.seed = 3;
  t.sampling.seed = 3;
  t.sampling.proportion_from_po = 0.5;
  return t;
}

GnnCheckpoint trained_checkpoint(const TrainConfig& t) {
  const SdmGraph data = build_training_graph(separable_region(), t.model);
  const TrainResult r = train(data, t);
  return {r.params, t, feature_dims(data.graph), data.options, data.normalizer, data.species_ids};
}

}  // namespace

TEST_CASE("bce_with_logits reference values") {
  const std::vector<double> zero = {0.0};
  const std::vector<double> one = {1.0};
  CHECK(bce_with_logits(zero, one) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  const std::vector<double> zeros = {0.0, 0.0};
  const std::vector<double> mixed = {1.0, 0.0};
  CHECK(bce_with_logits(zeros, mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const std::vector<double> hundred = {100.0};
  const double tiny = bce_with_logits(hundred, one);
  CHECK(tiny > 0.0);
  CHECK(std::abs(tiny - 3.7200759760208361e-44) / 3.7200759760208361e-44 < 1e-12);
}

TEST_CASE("bce_with_logits stays finite at large magnitudes") {
  for (double z : {-700.0, -300.0, 300.0, 700.0}) {
    for (double y : {0.0, 1.0}) {
      const std::vector<double> s = {z};
      const std::vector<double> l = {y};
      const double v = bce_with_logits(s, l);
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
  const std::vector<double> s = {-700.0};
  const std::vector<double> l = {1.0};
  CHECK(bce_with_logits(s, l) == doctest::Approx(700.0));
}

TEST_CASE("bce_with_logits label symmetry") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20, 20);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s, l, ns, nl;
    for (int i = 0; i < 9; ++i) {
      s.push_back(u(rng));
      l.push_back(coin(rng) ? 1.0 : 0.0);
      ns.push_back(-s.back());
      nl.push_back(1.0 - l.back());
    }
    CHECK(bce_with_logits(s, l) == doctest::Approx(bce_with_logits(ns, nl)).epsilon(1e-14));
  }
}

TEST_CASE("bce_with_logits input errors") {
  CHECK_THROWS_AS(bce_with_logits({}, {}), EmptyInputError);
  const std::vector<double> s = {0.0, 1.0};
  const std::vector<double> l = {1.0};
  CHECK_THROWS_AS(bce_with_logits(s, l), ShapeMismatchError);
}

TEST_CASE("training configuration validation") {
  TrainConfig t = small_train();
  t.learning_rate = -1e-3;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = small_train();
  t.num_epochs = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("loss falls over ten epochs for every activation") {
  const RegionDataset region = separable_region();
  for (Activation a : kAllActivations) {
    CAPTURE(to_string(a));
    TrainConfig t = small_train(10);
    t.model.activation = a;
    const SdmGraph data = build_training_graph(region, t.model);
    const TrainResult r = train(data, t);
    REQUIRE(r.history.size() == 10);
    CHECK(r.history.back().loss < r.history.front().loss);
    for (const auto& rec : r.history) CHECK(std::isfinite(rec.loss));
  }
}

TEST_CASE("loss falls on the separable toy by epoch 50") {
  TrainConfig t = small_train(50);
  const SdmGraph data = build_training_graph(separable_region(), t.model);
  const TrainResult r = train(data, t);
  CHECK(r.history[49].loss < r.history[0].loss);
}

TEST_CASE("one epoch gives one history entry") {
  TrainConfig t = small_train(1);
  const SdmGraph data = build_training_graph(separable_region(), t.model);
  std::size_t calls = 0;
  TrainOptions opts;
  opts.on_epoch = [&](const EpochRecord& rec) {
    ++calls;
    CHECK(rec.n_pos == data.positives.size());
    CHECK(rec.n_neg == data.positives.size());
  };
  const TrainResult r = train(data, t, opts);
  CHECK(r.history.size() == 1);
  CHECK(calls == 1);
}

TEST_CASE("training is deterministic for a fixed seed") {
  for (bool negatives : {false, true}) {
    TrainConfig t = small_train(5);
    t.model.include_negative_edges = negatives;
    t.model.direction = negatives ? Direction::bidirectional : Direction::one_way;
    const SdmGraph data = build_training_graph(separable_region(), t.model);
    const TrainResult a = train(data, t);
    const TrainResult b = train(data, t);
    for (std::size_t e = 0; e < a.history.size(); ++e) CHECK(a.history[e].loss == b.history[e].loss);
    for (const auto& [role, mlp] : a.params) {
      for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(bitwise_equal(mlp.layers[l].weight, b.params.at(role).layers[l].weight));
      }
    }
  }
}

TEST_CASE("negative message edges are rebuilt from the epoch sample") {
  TrainConfig t = small_train(3);
  t.model.include_negative_edges = true;
  t.model.direction = Direction::bidirectional;
  const SdmGraph data = build_training_graph(separable_region(), t.model);
  const std::vector<LabeledPair> neg = {{0, 1, 0}, {2, 3, 0}};
  const TypedGraph g = epoch_message_graph(data, neg, t.model);
  CHECK(g.edge_set("nondet_l2s").size() == 2);
  CHECK(g.edge_set("nondet_s2l").senders == std::vector<Index>{1, 3});
  CHECK(epoch_message_graph(data, neg, small_train().model).has_edge_set("nondet_l2s") == false);
  CHECK(inference_message_graph(data, t).edge_set("nondet_l2s").size() == data.positives.size());
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  TempDir dir;
  const GnnCheckpoint ckpt = trained_checkpoint(small_train(2));
  save_checkpoint(dir / "c.bin", ckpt);
  const GnnCheckpoint back = load_checkpoint(dir / "c.bin");
  CHECK(back.config == ckpt.config);
  CHECK(back.dims == ckpt.dims);
  CHECK(back.species_ids == ckpt.species_ids);
  CHECK(back.normalizer.min == ckpt.normalizer.min);
  REQUIRE(back.params.size() == ckpt.params.size());
  for (const auto& [role, mlp] : ckpt.params) {
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      CHECK(bitwise_equal(mlp.layers[l].weight, back.params.at(role).layers[l].weight));
      CHECK(bitwise_equal(mlp.layers[l].bias, back.params.at(role).layers[l].bias));
    }
  }
}

TEST_CASE("loading into a different latent width fails") {
  TempDir dir;
  TrainConfig t = small_train(1);
  t.model.latent_dim = 16;
  save_checkpoint(dir / "c.bin", trained_checkpoint(t));
  ModelConfig expected = t.model;
  expected.latent_dim = 32;
  CHECK_THROWS_AS(load_checkpoint(dir / "c.bin", expected), ShapeMismatchError);
  CHECK_NOTHROW(load_checkpoint(dir / "c.bin", t.model));
}

TEST_CASE("damaged checkpoints are reported") {
  TempDir dir;
  save_checkpoint(dir / "c.bin", trained_checkpoint(small_train(1)));
  const std::string bytes = read_text(dir / "c.bin");

  SUBCASE("truncated") {
    write_text(dir / "t.bin", bytes.substr(0, bytes.size() - 17));
    CHECK_THROWS_AS(load_checkpoint(dir / "t.bin"), CorruptCheckpointError);
    write_text(dir / "h.bin", bytes.substr(0, 20));
    CHECK_THROWS_AS(load_checkpoint(dir / "h.bin"), CorruptCheckpointError);
  }
  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    write_text(dir / "m.bin", bad);
    CHECK_THROWS_AS(load_checkpoint(dir / "m.bin"), CorruptCheckpointError);
  }
  SUBCASE("newer version") {
    std::string bad = bytes;
    const auto pos = bad.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    bad[pos + 10] = '9';
    write_text(dir / "v.bin", bad);
    CHECK_THROWS_AS(load_checkpoint(dir / "v.bin"), VersionMismatchError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir / "absent.bin"), IoError);
  }
}

TEST_CASE("periodic checkpoints are written during training") {
  TempDir dir;
  TrainConfig t = small_train(4);
  t.checkpoint_every = 2;
  const SdmGraph data = build_training_graph(separable_region(), t.model);
  TrainOptions opts;
  opts.checkpoint_path = dir / "periodic.bin";
  train(data, t, opts);
  CHECK(std::filesystem::exists(dir / "periodic.bin"));
  CHECK_NOTHROW(load_checkpoint(dir / "periodic.bin"));
}
