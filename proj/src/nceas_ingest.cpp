#include "hsdm/nceas_ingest.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "hsdm/csv.hpp"
#include "hsdm/errors.hpp"

namespace hsdm {

RegionPaths RegionPaths::in_directory(const std::filesystem::path& dir) {
  return RegionPaths{dir / "po.csv", dir / "bg.csv", dir / "pa_env.csv", dir / "pa_labels.csv",
                     dir / "species.csv"};
}

Index RegionDataset::unique_test_locations() const {
  std::set<std::pair<double, double>> keys;
  for (Eigen::Index i = 0; i < pa_test.coords.rows(); ++i) {
    keys.emplace(pa_test.coords(i, 0), pa_test.coords(i, 1));
  }
  return keys.size();
}

namespace {

// Reads x, y and the named env columns of every row.
void read_location_columns(const csv::Table& table, const std::vector<std::string>& env_names,
                           std::size_t fixed_columns, Matrix& coords, Matrix& env) {
  const std::size_t cx = table.column("x");
  const std::size_t cy = table.column("y");
  std::vector<std::size_t> env_cols;
  for (const auto& name : env_names) env_cols.push_back(table.column(name));
  if (table.header.size() != fixed_columns + env_names.size()) {
    throw InconsistentWidthError(fmt::format(
        "{}: {} environmental columns, expected {} (as in po.csv)", table.source.string(),
        table.header.size() - fixed_columns, env_names.size()));
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  coords.resize(n, 2);
  env.resize(n, static_cast<Eigen::Index>(env_names.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto i = static_cast<Eigen::Index>(r);
    coords(i, 0) = csv::parse_double(row[cx], table, r, cx);
    coords(i, 1) = csv::parse_double(row[cy], table, r, cy);
    for (std::size_t k = 0; k < env_cols.size(); ++k) {
      env(i, static_cast<Eigen::Index>(k)) = csv::parse_double(row[env_cols[k]], table, r, env_cols[k]);
    }
  }
}

// Row order by (coords, env) lexicographically.
std::vector<Index> canonical_order(const Matrix& coords, const Matrix& env) {
  std::vector<Index> order(static_cast<std::size_t>(coords.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    for (Eigen::Index c = 0; c < coords.cols(); ++c) {
      if (coords(ia, c) != coords(ib, c)) return coords(ia, c) < coords(ib, c);
    }
    for (Eigen::Index c = 0; c < env.cols(); ++c) {
      if (env(ia, c) != env(ib, c)) return env(ia, c) < env(ib, c);
    }
    return false;
  });
  return order;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& order) {
  Matrix out(static_cast<Eigen::Index>(order.size()), m.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(order[i]));
  }
  return out;
}

}  // namespace

RegionDataset load_region(const RegionPaths& paths, std::string region_code) {
  RegionDataset ds;
  ds.region_code = std::move(region_code);

  // species.csv
  const csv::Table species_table = csv::read(paths.species);
  {
    const std::size_t cid = species_table.column("species_id");
    const auto cgroup = species_table.find_column("group");
    for (const auto& row : species_table.rows) {
      ds.species.push_back({row[cid], cgroup ? row[*cgroup] : std::string{}});
    }
    std::sort(ds.species.begin(), ds.species.end(),
              [](const SpeciesEntry& a, const SpeciesEntry& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < ds.species.size(); ++i) {
      if (ds.species[i].id == ds.species[i - 1].id) {
        throw UnknownSpeciesError(fmt::format("{}: duplicate species_id '{}'",
                                              paths.species.string(), ds.species[i].id));
      }
    }
  }
  std::unordered_map<std::string, Index> species_index;
  for (std::size_t i = 0; i < ds.species.size(); ++i) species_index.emplace(ds.species[i].id, i);
  auto lookup_species = [&](const std::string& id, const std::filesystem::path& file) {
    auto it = species_index.find(id);
    if (it == species_index.end()) {
      throw UnknownSpeciesError(
          fmt::format("{}: species '{}' is not listed in {}", file.string(), id, paths.species.string()));
    }
    return it->second;
  };

  // po.csv defines the environmental feature names.
  const csv::Table po = csv::read(paths.po);
  const std::size_t c_species = po.column("species_id");
  const std::size_t c_x = po.column("x");
  const std::size_t c_y = po.column("y");
  for (std::size_t c = 0; c < po.header.size(); ++c) {
    if (c != c_species && c != c_x && c != c_y) ds.env_feature_names.push_back(po.header[c]);
  }
  read_location_columns(po, ds.env_feature_names, 3, ds.po.coords, ds.po.env);
  ds.po.species.reserve(po.rows.size());
  for (const auto& row : po.rows) ds.po.species.push_back(lookup_species(row[c_species], paths.po));

  const csv::Table bg = csv::read(paths.background);
  read_location_columns(bg, ds.env_feature_names, 2, ds.background.coords, ds.background.env);

  const csv::Table pa_env = csv::read(paths.pa_env);
  const std::size_t c_site = pa_env.column("site_id");
  read_location_columns(pa_env, ds.env_feature_names, 3, ds.pa_test.coords, ds.pa_test.env);
  for (const auto& row : pa_env.rows) ds.pa_test.site_ids.push_back(row[c_site]);

  const csv::Table pa_labels = csv::read(paths.pa_labels);
  const std::size_t c_label_site = pa_labels.column("site_id");
  std::vector<std::pair<std::size_t, Index>> label_columns;  // (csv column, species index)
  for (std::size_t c = 0; c < pa_labels.header.size(); ++c) {
    if (c == c_label_site) continue;
    label_columns.emplace_back(c, lookup_species(pa_labels.header[c], paths.pa_labels));
  }
  std::unordered_map<std::string, std::size_t> label_row;
  for (std::size_t r = 0; r < pa_labels.rows.size(); ++r) {
    label_row.emplace(pa_labels.rows[r][c_label_site], r);
  }
  const auto n_sites = static_cast<Eigen::Index>(ds.pa_test.size());
  ds.pa_test.labels = Eigen::MatrixXi::Constant(n_sites, static_cast<Eigen::Index>(ds.num_species()), -1);
  for (Eigen::Index i = 0; i < n_sites; ++i) {
    const std::string& site = ds.pa_test.site_ids[static_cast<std::size_t>(i)];
    auto it = label_row.find(site);
    if (it == label_row.end()) {
      throw MissingColumnError(
          fmt::format("{}: no label row for site '{}'", paths.pa_labels.string(), site));
    }
    const auto& row = pa_labels.rows[it->second];
    for (const auto& [col, sp] : label_columns) {
      const std::string& cell = row[col];
      if (cell != "0" && cell != "1") {
        throw NonNumericFeatureError(fmt::format("{}: site '{}' species '{}': label '{}' is not 0/1",
                                                 paths.pa_labels.string(), site,
                                                 pa_labels.header[col], cell));
      }
      ds.pa_test.labels(i, static_cast<Eigen::Index>(sp)) = cell == "1" ? 1 : 0;
    }
  }
  return ds;
}

AggregatedLocations aggregate_locations(const PoRecords& records) {
  // Sort records canonically so that the mean is computed in a fixed order.
  std::vector<Index> order(records.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    for (Eigen::Index c = 0; c < 2; ++c) {
      if (records.coords(ia, c) != records.coords(ib, c)) return records.coords(ia, c) < records.coords(ib, c);
    }
    for (Eigen::Index c = 0; c < records.env.cols(); ++c) {
      if (records.env(ia, c) != records.env(ib, c)) return records.env(ia, c) < records.env(ib, c);
    }
    return records.species[a] < records.species[b];
  });

  std::vector<Index> location_of(records.size());
  std::vector<Eigen::Index> first_row;
  std::vector<std::size_t> counts;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(order[k]);
    const bool same = !first_row.empty() &&
                      records.coords(first_row.back(), 0) == records.coords(r, 0) &&
                      records.coords(first_row.back(), 1) == records.coords(r, 1);
    if (!same) {
      first_row.push_back(r);
      counts.push_back(0);
    }
    location_of[order[k]] = first_row.size() - 1;
    ++counts.back();
  }

  AggregatedLocations out;
  const auto n_loc = static_cast<Eigen::Index>(first_row.size());
  out.coords.resize(n_loc, 2);
  out.env = Matrix::Zero(n_loc, records.env.cols());
  for (Eigen::Index l = 0; l < n_loc; ++l) out.coords.row(l) = records.coords.row(first_row[static_cast<std::size_t>(l)]);
  for (Index r : order) {
    out.env.row(static_cast<Eigen::Index>(location_of[r])) += records.env.row(static_cast<Eigen::Index>(r));
  }
  for (Eigen::Index l = 0; l < n_loc; ++l) out.env.row(l) /= static_cast<double>(counts[static_cast<std::size_t>(l)]);

  std::set<std::pair<Index, Index>> pairs;
  for (Index r = 0; r < records.size(); ++r) pairs.emplace(location_of[r], records.species[r]);
  out.detections.assign(pairs.begin(), pairs.end());
  return out;
}

SpeciesFeatureSpec SpeciesFeatureSpec::from_table(const std::vector<SpeciesEntry>& species) {
  SpeciesFeatureSpec spec;
  spec.one_hot_dim = species.size();
  std::set<std::string> groups;
  for (const auto& s : species) {
    if (!s.group.empty()) groups.insert(s.group);
  }
  spec.include_group = !groups.empty();
  spec.group_vocabulary.assign(groups.begin(), groups.end());
  return spec;
}

Matrix build_species_features(const std::vector<SpeciesEntry>& species,
                              const SpeciesFeatureSpec& spec) {
  if (spec.one_hot_dim != species.size()) {
    throw ShapeMismatchError(fmt::format("species feature spec expects {} species, table has {}",
                                         spec.one_hot_dim, species.size()));
  }
  if (spec.include_group && spec.group_vocabulary.empty()) {
    throw UnknownGroupError("group features requested but the group vocabulary is empty");
  }
  const auto n = static_cast<Eigen::Index>(species.size());
  const auto n_groups = static_cast<Eigen::Index>(spec.include_group ? spec.group_vocabulary.size() : 0);
  Matrix out = Matrix::Zero(n, n + n_groups);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = 1.0;
    if (!spec.include_group) continue;
    const std::string& g = species[static_cast<std::size_t>(j)].group;
    auto it = std::find(spec.group_vocabulary.begin(), spec.group_vocabulary.end(), g);
    if (it == spec.group_vocabulary.end()) {
      throw UnknownGroupError(fmt::format("species '{}' has group '{}' outside the vocabulary",
                                          species[static_cast<std::size_t>(j)].id, g));
    }
    out(j, n + (it - spec.group_vocabulary.begin())) = 1.0;
  }
  return out;
}

Matrix location_inputs(const Matrix& env, const Matrix& coords, const IngestOptions& options) {
  if (!options.include_coords) return env;
  Matrix out(env.rows(), env.cols() + 2);
  out << env, coords;
  return out;
}

SdmGraph build_training_graph(const RegionDataset& dataset, const ModelConfig& model,
                              const IngestOptions& options) {
  model.validate();
  const AggregatedLocations agg = aggregate_locations(dataset.po);
  const std::vector<Index> bg_order = canonical_order(dataset.background.coords, dataset.background.env);
  const Matrix bg_env = take_rows(dataset.background.env, bg_order);
  const Matrix bg_coords = take_rows(dataset.background.coords, bg_order);

  const Matrix po_inputs = location_inputs(agg.env, agg.coords, options);
  const Matrix bg_inputs = location_inputs(bg_env, bg_coords, options);
  Matrix raw(po_inputs.rows() + bg_inputs.rows(), po_inputs.cols());
  raw << po_inputs, bg_inputs;

  SdmGraph out;
  out.options = options;
  out.num_po_locations = static_cast<Index>(po_inputs.rows());
  out.num_background_locations = static_cast<Index>(bg_inputs.rows());
  out.normalizer = options.normalize ? fit_normalizer(raw) : identity_normalizer(raw.cols());
  const Matrix location_features = options.normalize ? out.normalizer.apply(raw) : raw;

  const Matrix species_features =
      build_species_features(dataset.species, SpeciesFeatureSpec::from_table(dataset.species));
  for (const auto& s : dataset.species) out.species_ids.push_back(s.id);

  std::vector<Index> senders;
  std::vector<Index> receivers;
  for (const auto& [loc, sp] : agg.detections) {
    senders.push_back(loc);
    receivers.push_back(sp);
    out.positives.push_back({loc, sp, 1});
  }
  const Index n_locations = static_cast<Index>(location_features.rows());
  const Index n_species = static_cast<Index>(species_features.rows());

  EdgeSet det = EdgeSet::with_unit_features(std::string(names::kDetL2S), std::string(names::kLocation),
                                            std::string(names::kSpecies), senders, receivers);
  TypedGraph graph = TypedGraph{}
                         .add_node_set(NodeSet(std::string(names::kLocation), n_locations, location_features))
                         .add_node_set(NodeSet(std::string(names::kSpecies), n_species, species_features));
  if (model.direction == Direction::bidirectional) {
    graph = graph.add_edge_set(reverse_edge_set(det, std::string(names::kDetS2L)));
  }
  out.graph = graph.add_edge_set(std::move(det));
  return out;
}

Matrix test_location_features(const RegionDataset& dataset, const SdmGraph& graph) {
  const Matrix raw = location_inputs(dataset.pa_test.env, dataset.pa_test.coords, graph.options);
  return graph.options.normalize ? graph.normalizer.apply(raw) : raw;
}

TypedGraph with_negative_message_edges(const TypedGraph& graph,
                                       std::span<const LabeledPair> negatives,
                                       const ModelConfig& model) {
  std::set<std::pair<Index, Index>> unique;
  for (const LabeledPair& p : negatives) unique.emplace(p.location_index, p.species_index);
  std::vector<Index> senders;
  std::vector<Index> receivers;
  for (const auto& [loc, sp] : unique) {
    senders.push_back(loc);
    receivers.push_back(sp);
  }
  EdgeSet nondet = EdgeSet::with_unit_features(std::string(names::kNondetL2S),
                                               std::string(names::kLocation),
                                               std::string(names::kSpecies), senders, receivers);
  TypedGraph out = graph.without_edge_set(names::kNondetS2L);
  if (model.direction == Direction::bidirectional) {
    out = out.with_edge_set(reverse_edge_set(nondet, std::string(names::kNondetS2L)));
  }
  return out.with_edge_set(std::move(nondet));
}

}  // namespace hsdm
