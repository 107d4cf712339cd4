#include <algorithm>
#include <random>

#include <doctest.h>

#include "hsdm/errors.hpp"
#include "hsdm/nceas_ingest.hpp"
#include "hsdm/synthetic.hpp"
#include "support.hpp"

using namespace hsdm;
using test_support::TempDir;
using test_support::write_text;

namespace {

void write_small_region(const std::filesystem::path& dir) {
  write_text(dir / "species.csv", "species_id,group\nsp_b,plant\nsp_a,bird\n");
  write_text(dir / "po.csv",
             "species_id,x,y,temp,rain\n"
             "sp_a,1.0,2.0,1,10\n"
             "sp_b,1.0,2.0,3,30\n"
             "sp_a,1.0,2.0,2,20\n"
             "sp_b,5.0,5.0,4,40\n"
             "sp_a,1.000000001,2.0,9,90\n");
  write_text(dir / "bg.csv", "x,y,temp,rain\n0,0,0,0\n9,9,8,80\n");
  write_text(dir / "pa_env.csv", "site_id,x,y,temp,rain\ns1,3,3,2,20\ns2,4,4,5,50\ns3,3,3,2,20\n");
  write_text(dir / "pa_labels.csv", "site_id,sp_a\ns2,0\ns1,1\ns3,0\n");
}

ModelConfig model(Direction d = Direction::one_way) {
  ModelConfig c;
  c.direction = d;
  return c;
}

}  // namespace

TEST_CASE("a small region loads in canonical order") {
  TempDir dir;
  write_small_region(dir.path());
  const RegionDataset ds = load_region(RegionPaths::in_directory(dir.path()), "TST");
  CHECK(ds.region_code == "TST");
  CHECK(ds.env_feature_names == std::vector<std::string>{"temp", "rain"});
  REQUIRE(ds.num_species() == 2);
  CHECK(ds.species[0].id == "sp_a");
  CHECK(ds.species[0].group == "bird");
  CHECK(ds.po.size() == 5);
  CHECK(ds.background.size() == 2);
  CHECK(ds.pa_test.size() == 3);
  CHECK(ds.unique_test_locations() == 2);
  // sp_b has no label column.
  CHECK((ds.pa_test.labels.col(1).array() == -1).all());
  const auto s1 = std::find(ds.pa_test.site_ids.begin(), ds.pa_test.site_ids.end(), "s1") - ds.pa_test.site_ids.begin();
  CHECK(ds.pa_test.labels(s1, 0) == 1);
}

TEST_CASE("aggregation averages co-located records and deduplicates detections") {
  TempDir dir;
  write_small_region(dir.path());
  const RegionDataset ds = load_region(RegionPaths::in_directory(dir.path()));
  const AggregatedLocations agg = aggregate_locations(ds.po);
  // (1, 2), (1.000000001, 2) and (5, 5) stay distinct.
  REQUIRE(agg.coords.rows() == 3);
  CHECK(agg.coords(0, 0) == 1.0);
  CHECK(agg.env(0, 0) == 2.0);
  CHECK(agg.env(0, 1) == 20.0);
  CHECK(agg.coords(1, 0) == 1.000000001);
  CHECK(agg.env(1, 0) == 9.0);
  const std::vector<std::pair<Index, Index>> expected = {{0, 0}, {0, 1}, {1, 0}, {2, 1}};
  CHECK(agg.detections == expected);
}

TEST_CASE("repeated detections at one location collapse to one pair") {
  PoRecords r;
  r.species = {0, 0};
  r.coords = (Matrix(2, 2) << 1, 2, 1, 2).finished();
  r.env = (Matrix(2, 1) << 1, 3).finished();
  const AggregatedLocations agg = aggregate_locations(r);
  CHECK(agg.coords.rows() == 1);
  CHECK(agg.env(0, 0) == 2.0);
  CHECK(agg.detections.size() == 1);
}

TEST_CASE("species features are one-hot with optional groups") {
  const std::vector<SpeciesEntry> plain = {{"a", ""}, {"b", ""}, {"c", ""}, {"d", ""}};
  const auto spec = SpeciesFeatureSpec::from_table(plain);
  CHECK_FALSE(spec.include_group);
  const Matrix f = build_species_features(plain, spec);
  CHECK(f.cols() == 4);
  CHECK(f.row(2) == (Eigen::RowVectorXd(4) << 0, 0, 1, 0).finished());

  const std::vector<SpeciesEntry> grouped = {{"a", "bird"}, {"b", "plant"}};
  const auto gspec = SpeciesFeatureSpec::from_table(grouped);
  CHECK(gspec.include_group);
  CHECK(gspec.group_vocabulary == std::vector<std::string>{"bird", "plant"});
  const Matrix g = build_species_features(grouped, gspec);
  CHECK(g.row(1) == (Eigen::RowVectorXd(4) << 0, 1, 0, 1).finished());

  SpeciesFeatureSpec broken = gspec;
  broken.group_vocabulary.clear();
  CHECK_THROWS_AS(build_species_features(grouped, broken), UnknownGroupError);
}

TEST_CASE("training graph construction") {
  TempDir dir;
  write_small_region(dir.path());
  const RegionDataset ds = load_region(RegionPaths::in_directory(dir.path()));
  const SdmGraph one = build_training_graph(ds, model());
  CHECK(one.num_po_locations == 3);
  CHECK(one.num_background_locations == 2);
  CHECK(one.graph.node_set("location").count == 5);
  CHECK(one.graph.node_set("species").count == 2);
  CHECK(one.graph.node_set("species").feature_dim() == 4);
  CHECK(one.graph.edge_set("det_l2s").size() == 4);
  CHECK(one.positives.size() == 4);
  CHECK_FALSE(one.graph.has_edge_set("det_s2l"));
  for (Index s : one.graph.edge_set("det_l2s").senders) CHECK(s < 3);
  // Fitted on PO and background together: every column spans [-1, 1].
  const Matrix& f = one.graph.node_set("location").features;
  CHECK(f.colwise().minCoeff().isApprox(Eigen::RowVector2d(-1, -1)));
  CHECK(f.colwise().maxCoeff().isApprox(Eigen::RowVector2d(1, 1)));

  const SdmGraph bi = build_training_graph(ds, model(Direction::bidirectional));
  CHECK(bi.graph.edge_set("det_s2l").size() == 4);

  const SdmGraph raw = build_training_graph(ds, model(), IngestOptions{false, true});
  CHECK(raw.graph.node_set("location").feature_dim() == 4);
  CHECK(raw.graph.node_set("location").features(0, 0) == 2.0);
  CHECK(raw.graph.node_set("location").features(0, 2) == 1.0);
  CHECK(raw.graph.node_set("location").features(0, 3) == 2.0);

  const Matrix test = test_location_features(ds, one);
  CHECK(test.rows() == 3);
  CHECK(test.cols() == 2);
}

TEST_CASE("shuffled CSV rows give the same graph") {
  TempDir a, b;
  write_small_region(a.path());
  write_small_region(b.path());
  write_text(b / "po.csv",
             "species_id,x,y,temp,rain\n"
             "sp_a,1.000000001,2.0,9,90\n"
             "sp_b,5.0,5.0,4,40\n"
             "sp_a,1.0,2.0,2,20\n"
             "sp_b,1.0,2.0,3,30\n"
             "sp_a,1.0,2.0,1,10\n");
  write_text(b / "bg.csv", "x,y,temp,rain\n9,9,8,80\n0,0,0,0\n");
  const SdmGraph ga = build_training_graph(load_region(RegionPaths::in_directory(a.path())), model());
  const SdmGraph gb = build_training_graph(load_region(RegionPaths::in_directory(b.path())), model());
  CHECK(ga.graph.node_set("location").features == gb.graph.node_set("location").features);
  CHECK(ga.graph.edge_set("det_l2s") == gb.graph.edge_set("det_l2s"));
}

TEST_CASE("malformed regions are rejected") {
  TempDir dir;
  write_small_region(dir.path());
  const RegionPaths paths = RegionPaths::in_directory(dir.path());

  SUBCASE("missing species column") {
    write_text(dir / "po.csv", "taxon,x,y,temp,rain\nsp_a,1,2,1,10\n");
    CHECK_THROWS_AS(load_region(paths), MissingColumnError);
  }
  SUBCASE("non-numeric feature") {
    write_text(dir / "bg.csv", "x,y,temp,rain\n0,0,warm,0\n");
    CHECK_THROWS_AS(load_region(paths), NonNumericFeatureError);
  }
  SUBCASE("unknown species") {
    write_text(dir / "po.csv", "species_id,x,y,temp,rain\nsp_z,1,2,1,10\n");
    CHECK_THROWS_AS(load_region(paths), UnknownSpeciesError);
  }
  SUBCASE("env width differs") {
    write_text(dir / "bg.csv", "x,y,temp\n0,0,0\n");
    CHECK_THROWS_AS(load_region(paths), MissingColumnError);
    write_text(dir / "bg.csv", "x,y,temp,rain,wind\n0,0,0,0,0\n");
    CHECK_THROWS_AS(load_region(paths), InconsistentWidthError);
  }
  SUBCASE("label that is not 0/1") {
    write_text(dir / "pa_labels.csv", "site_id,sp_a\ns1,2\ns2,0\ns3,0\n");
    CHECK_THROWS_AS(load_region(paths), NonNumericFeatureError);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(dir / "bg.csv");
    CHECK_THROWS_AS(load_region(paths), IoError);
  }
}

TEST_CASE("AWT-shaped fixture has the published counts") {
  TempDir dir;
  const SyntheticRegion region = generate_region(awt_like_config());
  write_region(region.dataset, dir.path());
  const RegionDataset ds = load_region(RegionPaths::in_directory(dir.path()), "AWT");
  CHECK(ds.env_feature_names.size() == 13);
  CHECK(ds.num_species() == 40);
  CHECK(ds.unique_test_locations() == 442);
  const SdmGraph g = build_training_graph(ds, model());
  CHECK(g.num_po_locations == 3806);
  CHECK(g.num_background_locations == 10000);
  CHECK(g.graph.node_set("location").count == 3806 + 10000);
  // Groups are present in this region, so they extend the species features.
  CHECK(g.graph.node_set("species").feature_dim() > 40);
}

TEST_CASE("SWI-shaped fixture has the published schema") {
  TempDir dir;
  const SyntheticRegion region = generate_region(swi_like_config(0.1));
  write_region(region.dataset, dir.path());
  const RegionDataset ds = load_region(RegionPaths::in_directory(dir.path()), "SWI");
  CHECK(ds.env_feature_names.size() == 13);
  CHECK(ds.num_species() == 30);
  CHECK(build_training_graph(ds, model()).graph.node_set("species").feature_dim() == 30);
}
