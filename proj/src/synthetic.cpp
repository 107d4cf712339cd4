#include "hsdm/synthetic.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "hsdm/activation.hpp"
#include "hsdm/errors.hpp"

namespace hsdm {

namespace {

constexpr std::array<const char*, 6> kGroupNames = {"bird", "plant", "mammal", "reptile", "frog", "bat"};

struct Draw {
  double x = 0.0;
  double y = 0.0;
  Eigen::RowVectorXd u;
};

class Generator {
 public:
  Generator(const SyntheticRegionConfig& config) : config_(config), rng_(config.seed) {
    const auto k = static_cast<Eigen::Index>(config.num_env);
    offsets_.resize(k);
    scales_.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      offsets_(j) = 10.0 * static_cast<double>(j) - 5.0;
      scales_(j) = 1.0 + 0.5 * static_cast<double>(j);
    }
  }

  Draw location() {
    std::uniform_real_distribution<double> coord(0.0, 1000.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Draw d;
    do {
      d.x = coord(rng_);
      d.y = coord(rng_);
    } while (!used_.emplace(d.x, d.y).second);
    d.u.resize(static_cast<Eigen::Index>(config_.num_env));
    for (Eigen::Index j = 0; j < d.u.size(); ++j) d.u(j) = unit(rng_);
    return d;
  }

  Eigen::RowVectorXd env_of(const Draw& d) const {
    return (offsets_.array() + scales_.array() * d.u.array()).matrix();
  }

  bool bernoulli(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  const SyntheticRegionConfig& config_;
  std::mt19937_64 rng_;
  Eigen::RowVectorXd offsets_;
  Eigen::RowVectorXd scales_;
  std::set<std::pair<double, double>> used_;
};

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  return out;
}

void write_env(std::ofstream& out, const Matrix& env, Eigen::Index row) {
  for (Eigen::Index j = 0; j < env.cols(); ++j) out << ',' << number(env(row, j));
}

}  // namespace

SyntheticRegion generate_region(const SyntheticRegionConfig& config) {
  if (config.num_species == 0 || config.num_env == 0) {
    throw ConfigError("synthetic region needs at least one species and one env feature");
  }
  if (config.num_groups > kGroupNames.size()) {
    throw ConfigError(fmt::format("at most {} synthetic groups", kGroupNames.size()));
  }
  Generator gen(config);
  const auto S = static_cast<Eigen::Index>(config.num_species);
  const auto K = static_cast<Eigen::Index>(config.num_env);

  SyntheticRegion out;
  out.weights.resize(S, K);
  out.biases.resize(S);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> bias(-0.3, 0.3);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index j = 0; j < K; ++j) out.weights(s, j) = normal(gen.rng());
    out.weights.row(s).normalize();
    out.biases(s) = bias(gen.rng());
  }
  auto suitability = [&](const Eigen::RowVectorXd& u) {
    Eigen::RowVectorXd p(S);
    for (Eigen::Index s = 0; s < S; ++s) {
      p(s) = sigmoid(config.steepness * (out.weights.row(s).dot(u) + out.biases(s)));
    }
    return p;
  };

  RegionDataset& ds = out.dataset;
  ds.region_code = config.region_code;
  for (Eigen::Index j = 0; j < K; ++j) ds.env_feature_names.push_back(fmt::format("env{:02}", j + 1));
  for (Eigen::Index s = 0; s < S; ++s) {
    SpeciesEntry e{fmt::format("sp{:03}", s + 1), {}};
    if (config.num_groups > 0) {
      e.group = kGroupNames[static_cast<std::size_t>(s) * config.num_groups / config.num_species];
    }
    ds.species.push_back(std::move(e));
  }

  // PO records, one per detection (occasionally repeated).
  std::vector<Index> po_species;
  std::vector<Eigen::RowVectorXd> po_coords;
  std::vector<Eigen::RowVectorXd> po_env;
  for (std::size_t found = 0; found < config.num_po_locations;) {
    const Draw d = gen.location();
    const Eigen::RowVectorXd p = suitability(d.u);
    std::vector<Index> detected;
    for (Eigen::Index s = 0; s < S; ++s) {
      if (gen.bernoulli(p(s))) detected.push_back(static_cast<Index>(s));
    }
    if (detected.empty()) continue;
    ++found;
    const Eigen::RowVectorXd env = gen.env_of(d);
    for (Index s : detected) {
      const int copies = gen.bernoulli(config.duplicate_record_rate) ? 2 : 1;
      for (int c = 0; c < copies; ++c) {
        po_species.push_back(s);
        po_coords.push_back(Eigen::RowVector2d(d.x, d.y));
        po_env.push_back(env);
      }
    }
  }
  ds.po.species = po_species;
  ds.po.coords.resize(static_cast<Eigen::Index>(po_species.size()), 2);
  ds.po.env.resize(static_cast<Eigen::Index>(po_species.size()), K);
  for (std::size_t i = 0; i < po_species.size(); ++i) {
    ds.po.coords.row(static_cast<Eigen::Index>(i)) = po_coords[i];
    ds.po.env.row(static_cast<Eigen::Index>(i)) = po_env[i];
  }

  const auto B = static_cast<Eigen::Index>(config.num_background);
  ds.background.coords.resize(B, 2);
  ds.background.env.resize(B, K);
  for (Eigen::Index i = 0; i < B; ++i) {
    const Draw d = gen.location();
    ds.background.coords.row(i) << d.x, d.y;
    ds.background.env.row(i) = gen.env_of(d);
  }

  const auto T = static_cast<Eigen::Index>(config.num_pa_sites);
  const auto total = T + static_cast<Eigen::Index>(config.num_pa_duplicates);
  if (config.num_pa_duplicates > 0 && T == 0) throw ConfigError("duplicate PA sites need base sites");
  ds.pa_test.coords.resize(total, 2);
  ds.pa_test.env.resize(total, K);
  ds.pa_test.labels.resize(total, S);
  out.pa_suitability.resize(total, S);
  for (Eigen::Index i = 0; i < T; ++i) {
    const Draw d = gen.location();
    const Eigen::RowVectorXd p = suitability(d.u);
    ds.pa_test.coords.row(i) << d.x, d.y;
    ds.pa_test.env.row(i) = gen.env_of(d);
    out.pa_suitability.row(i) = p;
    for (Eigen::Index s = 0; s < S; ++s) ds.pa_test.labels(i, s) = gen.bernoulli(p(s)) ? 1 : 0;
  }
  for (Eigen::Index i = T; i < total; ++i) {
    const auto src = std::uniform_int_distribution<Eigen::Index>(0, T - 1)(gen.rng());
    ds.pa_test.coords.row(i) = ds.pa_test.coords.row(src);
    ds.pa_test.env.row(i) = ds.pa_test.env.row(src);
    ds.pa_test.labels.row(i) = ds.pa_test.labels.row(src);
    out.pa_suitability.row(i) = out.pa_suitability.row(src);
  }
  for (Eigen::Index i = 0; i < total; ++i) ds.pa_test.site_ids.push_back(fmt::format("site{:05}", i + 1));
  return out;
}

void write_region(const RegionDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const RegionPaths paths = RegionPaths::in_directory(dir);
  std::string env_header;
  for (const auto& name : ds.env_feature_names) env_header += "," + name;

  {
    auto out = open_csv(paths.po);
    out << "species_id,x,y" << env_header << '\n';
    for (Index i = 0; i < ds.po.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      out << ds.species.at(ds.po.species[i]).id << ',' << number(ds.po.coords(r, 0)) << ','
          << number(ds.po.coords(r, 1));
      write_env(out, ds.po.env, r);
      out << '\n';
    }
  }
  {
    auto out = open_csv(paths.background);
    out << "x,y" << env_header << '\n';
    for (Eigen::Index r = 0; r < ds.background.coords.rows(); ++r) {
      out << number(ds.background.coords(r, 0)) << ',' << number(ds.background.coords(r, 1));
      write_env(out, ds.background.env, r);
      out << '\n';
    }
  }
  {
    auto out = open_csv(paths.pa_env);
    out << "site_id,x,y" << env_header << '\n';
    for (Index i = 0; i < ds.pa_test.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      out << ds.pa_test.site_ids[i] << ',' << number(ds.pa_test.coords(r, 0)) << ','
          << number(ds.pa_test.coords(r, 1));
      write_env(out, ds.pa_test.env, r);
      out << '\n';
    }
  }
  {
    std::vector<Eigen::Index> labelled;
    for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(ds.species.size()); ++s) {
      if (ds.pa_test.labels.rows() == 0 || (ds.pa_test.labels.col(s).array() >= 0).all()) {
        labelled.push_back(s);
      }
    }
    auto out = open_csv(paths.pa_labels);
    out << "site_id";
    for (auto s : labelled) out << ',' << ds.species[static_cast<std::size_t>(s)].id;
    out << '\n';
    for (Index i = 0; i < ds.pa_test.size(); ++i) {
      out << ds.pa_test.site_ids[i];
      for (auto s : labelled) out << ',' << ds.pa_test.labels(static_cast<Eigen::Index>(i), s);
      out << '\n';
    }
  }
  {
    auto out = open_csv(paths.species);
    out << "species_id,group\n";
    for (const auto& s : ds.species) out << s.id << ',' << s.group << '\n';
  }
}

SyntheticRegionConfig toy_region_config(std::uint64_t seed) {
  SyntheticRegionConfig c;
  c.region_code = "TOY";
  c.num_species = 3;
  c.num_env = 2;
  c.num_po_locations = 30;
  c.num_background = 40;
  c.num_pa_sites = 40;
  c.seed = seed;
  return c;
}

namespace {

std::size_t scaled(std::size_t n, double scale) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale)));
}

}  // namespace

SyntheticRegionConfig awt_like_config(double scale, std::uint64_t seed) {
  SyntheticRegionConfig c;
  c.region_code = "AWT";
  c.num_species = 40;
  c.num_env = 13;
  c.num_po_locations = scaled(3806, scale);
  c.num_background = scaled(10000, scale);
  c.num_pa_sites = scaled(442, scale);
  c.num_pa_duplicates = scaled(20, scale);
  c.num_groups = 2;  // 20 birds, 20 plants
  c.seed = seed;
  return c;
}

SyntheticRegionConfig swi_like_config(double scale, std::uint64_t seed) {
  SyntheticRegionConfig c;
  c.region_code = "SWI";
  c.num_species = 30;
  c.num_env = 13;
  c.num_po_locations = scaled(11429, scale);
  c.num_background = scaled(10000, scale);
  c.num_pa_sites = scaled(10013, scale);
  c.seed = seed;
  return c;
}

}  // namespace hsdm
