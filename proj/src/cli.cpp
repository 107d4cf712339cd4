#include "hsdm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "hsdm/checkpoint.hpp"
#include "hsdm/config_json.hpp"
#include "hsdm/errors.hpp"
#include "hsdm/gradcheck.hpp"
#include "hsdm/logging.hpp"

namespace hsdm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{} is not valid JSON: {}", path.string(), e.what()));
  }
}

fs::path resolve(const fs::path& base, const json& value, std::string_view what) {
  if (!value.is_string()) throw ConfigError(fmt::format("{}: expected a path string", what));
  const fs::path p = value.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NonFiniteLossError*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const CorruptCheckpointError*>(&e)) {
    return kRuntime;
  }
  if (dynamic_cast<const Error*>(&e)) return kValidation;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kRuntime;
  return kRuntime;
}

template <typename Fn>
int guarded(std::string_view command, Fn&& fn) {
  try {
    log::init_from_env();
    return fn();
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    fmt::print(stderr, "{}: {}\n", command, e.what());
    return code;
  }
}

void write_log_line(std::ofstream& out, const EpochRecord& r) {
  const json line = {{"epoch", r.epoch}, {"loss", r.loss}, {"n_pos", r.n_pos},
                     {"n_neg", r.n_neg}, {"seconds", r.seconds}};
  out << line.dump() << '\n';
  out.flush();
}

RegionPaths region_from_json(const json& j, const fs::path& base, std::string& code) {
  if (!j.is_object()) throw ConfigError("manifest.region: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "dir" && key != "code" && key != "po" && key != "bg" && key != "pa_env" &&
        key != "pa_labels" && key != "species") {
      throw ConfigError(fmt::format("manifest.region: unknown key '{}'", key));
    }
  }
  if (j.contains("code")) {
    if (!j["code"].is_string()) throw ConfigError("manifest.region.code: expected a string");
    code = j["code"].get<std::string>();
  }
  RegionPaths paths;
  if (j.contains("dir")) paths = RegionPaths::in_directory(resolve(base, j["dir"], "manifest.region.dir"));
  auto file = [&](const char* key, fs::path& slot) {
    if (j.contains(key)) slot = resolve(base, j[key], key);
  };
  file("po", paths.po);
  file("bg", paths.background);
  file("pa_env", paths.pa_env);
  file("pa_labels", paths.pa_labels);
  file("species", paths.species);
  if (paths.po.empty() || paths.background.empty() || paths.pa_env.empty() ||
      paths.pa_labels.empty() || paths.species.empty()) {
    throw ConfigError("manifest.region: give 'dir' or all of po, bg, pa_env, pa_labels, species");
  }
  return paths;
}

std::string format_mean(const EvalReport& report) {
  return report.mean_auc ? fmt::format("{:.4f}", *report.mean_auc) : std::string("n/a");
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::gnn ? "gnn" : "baseline"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "gnn") return ModelKind::gnn;
  if (name == "baseline" || name == "mlp") return ModelKind::baseline;
  throw ConfigError(fmt::format("unknown model kind '{}' (gnn or baseline)", name));
}

RunManifest parse_manifest(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("manifest: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "region" && key != "model_kind" && key != "train" && key != "baseline" &&
        key != "output_dir" && key != "seed" && key != "include_coords" &&
        key != "normalize_gnn_inputs") {
      throw ConfigError(fmt::format("manifest: unknown key '{}'", key));
    }
  }
  RunManifest m;
  if (!j.contains("region")) throw ConfigError("manifest: 'region' is required");
  m.region = region_from_json(j["region"], base_dir, m.region_code);
  if (j.contains("model_kind")) {
    if (!j["model_kind"].is_string()) throw ConfigError("manifest.model_kind: expected a string");
    m.model_kind = parse_model_kind(j["model_kind"].get<std::string>());
  }
  if (j.contains("train")) m.train = train_config_from_json(j["train"]);
  if (j.contains("baseline")) m.baseline = baseline_config_from_json(j["baseline"]);
  if (!j.contains("output_dir")) throw ConfigError("manifest: 'output_dir' is required");
  m.output_dir = resolve(base_dir, j["output_dir"], "manifest.output_dir");
  json ingest = json::object();
  if (j.contains("include_coords")) ingest["include_coords"] = j["include_coords"];
  if (j.contains("normalize_gnn_inputs")) ingest["normalize"] = j["normalize_gnn_inputs"];
  m.ingest = ingest_options_from_json(ingest);
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer()) throw ConfigError("manifest.seed: expected an integer");
    apply_seed(m, s.is_number_unsigned() ? s.get<std::uint64_t>()
                                         : static_cast<std::uint64_t>(s.get<long long>()));
  }
  if (m.region_code.empty()) m.region_code = m.region.po.parent_path().filename().string();
  m.train.validate();
  m.baseline.validate();
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_json_file(path), path.parent_path());
}

void apply_seed(RunManifest& manifest, std::uint64_t seed) {
  manifest.train.seed = seed;
  manifest.train.sampling.seed = seed;
  manifest.baseline.seed = seed;
}

void require_region_files(const RegionPaths& paths) {
  for (const fs::path* p : {&paths.po, &paths.background, &paths.pa_env, &paths.pa_labels, &paths.species}) {
    if (!fs::exists(*p)) throw ConfigError(fmt::format("region file not found: {}", p->string()));
  }
}

int run_train(const RunManifest& m) {
  require_region_files(m.region);
  const RegionDataset dataset = load_region(m.region, m.region_code);
  fs::create_directories(m.output_dir);
  const fs::path checkpoint_path = m.output_dir / "checkpoint.bin";
  std::ofstream log_out(m.output_dir / "train_log.jsonl", std::ios::trunc);
  if (!log_out) throw IoError(fmt::format("cannot write {}", (m.output_dir / "train_log.jsonl").string()));

  if (m.model_kind == ModelKind::gnn) {
    const SdmGraph data = build_training_graph(dataset, m.train.model, m.ingest);
    log::info("training gnn on {}: {} locations ({} PO), {} species, {} detections", m.region_code,
              data.num_po_locations + data.num_background_locations, data.num_po_locations,
              data.species_ids.size(), data.positives.size());
    TrainOptions options;
    options.on_epoch = [&](const EpochRecord& r) { write_log_line(log_out, r); };
    if (m.train.checkpoint_every > 0) options.checkpoint_path = checkpoint_path;
    const TrainResult result = train(data, m.train, options);
    save_checkpoint(checkpoint_path, {result.params, m.train, feature_dims(data.graph), data.options,
                                      data.normalizer, data.species_ids});
    log::info("final loss {:.6f}", result.history.back().loss);
  } else {
    const BaselineData data = make_baseline_data(dataset, m.ingest.include_coords);
    log::info("training baseline on {}: {} PO locations, {} background, {} species", m.region_code,
              data.po_features.rows(), data.background_features.rows(), data.species_ids.size());
    const BaselineResult result = train_baseline(data, m.baseline);
    for (const auto& r : result.history) write_log_line(log_out, r);
    save_baseline_checkpoint(checkpoint_path, {result.params, m.baseline, data.normalizer,
                                               data.include_coords, data.species_ids});
    log::info("final loss {:.6f}", result.history.back().loss);
  }
  log::info("wrote {}", checkpoint_path.string());
  return kOk;
}

int cmd_train(const fs::path& manifest_path, const TrainOverrides& overrides) {
  return guarded("train", [&] {
    RunManifest m = load_manifest(manifest_path);
    if (overrides.seed) apply_seed(m, *overrides.seed);
    if (overrides.include_coords) m.ingest.include_coords = *overrides.include_coords;
    if (overrides.normalize_gnn_inputs) m.ingest.normalize = *overrides.normalize_gnn_inputs;
    if (overrides.output_dir) m.output_dir = *overrides.output_dir;
    return run_train(m);
  });
}

EvalReport evaluate_checkpoint(const fs::path& checkpoint, const RegionPaths& region,
                               const std::string& region_code) {
  require_region_files(region);
  const std::string kind = read_checkpoint_kind(checkpoint);
  const RegionDataset dataset = load_region(region, region_code);
  std::vector<std::string> region_species;
  for (const auto& s : dataset.species) region_species.push_back(s.id);

  if (parse_model_kind(kind) == ModelKind::gnn) {
    const GnnCheckpoint ckpt = load_checkpoint(checkpoint);
    if (ckpt.species_ids != region_species) {
      throw ConfigError("checkpoint species do not match the region's species table");
    }
    const SdmGraph data = build_training_graph(dataset, ckpt.config.model, ckpt.ingest);
    if (!(feature_dims(data.graph) == ckpt.dims)) {
      throw ShapeMismatchError("region feature widths differ from the checkpoint's");
    }
    const TypedGraph graph = inference_message_graph(data, ckpt.config);
    return evaluate_region(ckpt.params, ckpt.config.model, graph, ckpt.species_ids,
                           test_location_features(dataset, data), dataset.pa_test.labels,
                           region_code, "gnn");
  }
  const BaselineCheckpoint ckpt = load_baseline_checkpoint(checkpoint);
  if (ckpt.species_ids != region_species) {
    throw ConfigError("checkpoint species do not match the region's species table");
  }
  const Matrix raw = location_inputs(dataset.pa_test.env, dataset.pa_test.coords,
                                     IngestOptions{true, ckpt.include_coords});
  if (raw.cols() != ckpt.normalizer.width()) {
    throw ShapeMismatchError("region feature widths differ from the checkpoint's");
  }
  const Matrix logits = mlp_forward(ckpt.params, ckpt.normalizer.apply(raw));
  return evaluate_scores(logits, dataset.pa_test.labels, ckpt.species_ids, region_code, "baseline");
}

int cmd_eval(const EvalOptions& options) {
  return guarded("eval", [&] {
    RegionPaths region;
    std::string code;
    if (options.region_dir) {
      region = RegionPaths::in_directory(*options.region_dir);
      code = options.region_dir->filename().string();
      if (code.empty()) code = options.region_dir->parent_path().filename().string();
    } else if (options.manifest) {
      const RunManifest m = load_manifest(*options.manifest);
      region = m.region;
      code = m.region_code;
    } else {
      throw ConfigError("eval needs --region-dir or --manifest");
    }
    if (!fs::exists(options.checkpoint)) {
      throw ConfigError(fmt::format("checkpoint not found: {}", options.checkpoint.string()));
    }
    const ModelKind kind = parse_model_kind(read_checkpoint_kind(options.checkpoint));
    if (options.expected_kind && *options.expected_kind != kind) {
      throw ConfigError(fmt::format("checkpoint holds a {} model but --model-kind is {}",
                                    to_string(kind), to_string(*options.expected_kind)));
    }
    const EvalReport report = evaluate_checkpoint(options.checkpoint, region, code);
    write_report_json(options.out, report);
    if (options.csv) write_report_csv(*options.csv, report);
    for (const auto& s : report.skipped()) log::info("skipped {}: {}", s.species_id, s.skip_reason);
    fmt::print("mean_auc {}\n", format_mean(report));
    return kOk;
  });
}

namespace {

std::string axis_pointer(const std::string& axis, ModelKind kind) {
  if (axis.find('.') != std::string::npos) {
    std::string p = "/" + axis;
    std::replace(p.begin(), p.end(), '.', '/');
    return p;
  }
  if (axis == "seed") return "/seed";
  if (kind == ModelKind::baseline) {
    static const std::set<std::string, std::less<>> baseline_keys = {
        "hidden_dim", "num_layers", "background_mix_ratio", "noise_scale", "learning_rate",
        "num_epochs", "batch_size", "activation"};
    if (baseline_keys.contains(axis)) return "/baseline/" + axis;
  } else {
    static const std::map<std::string, std::string, std::less<>> gnn_keys = {
        {"latent", "/train/model/latent_dim"},
        {"latent_dim", "/train/model/latent_dim"},
        {"steps", "/train/model/num_message_passing_steps"},
        {"num_message_passing_steps", "/train/model/num_message_passing_steps"},
        {"layers", "/train/model/num_hidden_layers"},
        {"num_hidden_layers", "/train/model/num_hidden_layers"},
        {"direction", "/train/model/direction"},
        {"include_negative_edges", "/train/model/include_negative_edges"},
        {"aggregation", "/train/model/aggregation"},
        {"activation", "/train/model/activation"},
        {"node_update_input", "/train/model/node_update_input"},
        {"learning_rate", "/train/learning_rate"},
        {"num_epochs", "/train/num_epochs"},
        {"strategy", "/train/sampling/strategy"},
        {"k_locations", "/train/sampling/k_locations"},
        {"negatives_per_epoch", "/train/sampling/negatives_per_epoch"},
        {"proportion_from_po", "/train/sampling/proportion_from_po"}};
    if (auto it = gnn_keys.find(axis); it != gnn_keys.end()) return it->second;
  }
  throw ConfigError(fmt::format("sweep: unknown axis '{}'", axis));
}

std::string cell(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

int cmd_sweep(const fs::path& sweep_path, std::size_t parallel, std::optional<fs::path> output_dir) {
  return guarded("sweep", [&]() -> int {
    const json spec = read_json_file(sweep_path);
    if (!spec.is_object()) throw ConfigError("sweep spec: expected a JSON object");
    const fs::path base = sweep_path.parent_path();
    if (!spec.contains("manifest")) throw ConfigError("sweep spec: 'manifest' is required");
    const fs::path manifest_path = resolve(base, spec["manifest"], "sweep.manifest");
    const json manifest_json = read_json_file(manifest_path);
    const ModelKind kind = parse_model_kind(manifest_json.value("model_kind", std::string("gnn")));

    std::vector<std::string> axes;
    std::vector<std::vector<json>> values;
    for (const auto& [key, v] : spec.items()) {
      if (key == "manifest" || key == "output_dir") continue;
      if (!v.is_array()) throw ConfigError(fmt::format("sweep axis '{}': expected a list of values", key));
      if (v.empty()) throw ConfigError(fmt::format("sweep axis '{}': empty value list", key));
      axis_pointer(key, kind);
      axes.push_back(key);
      values.emplace_back(v.begin(), v.end());
    }
    if (axes.empty()) throw ConfigError("sweep spec lists no axes");

    fs::path out_dir = output_dir ? *output_dir
                       : spec.contains("output_dir") ? resolve(base, spec["output_dir"], "sweep.output_dir")
                                                     : base / "sweep";

    // Cross product, last axis varying fastest.
    std::vector<std::vector<std::size_t>> combos{{}};
    for (const auto& vs : values) {
      std::vector<std::vector<std::size_t>> next;
      for (const auto& c : combos) {
        for (std::size_t i = 0; i < vs.size(); ++i) {
          next.push_back(c);
          next.back().push_back(i);
        }
      }
      combos = std::move(next);
    }

    std::vector<RunManifest> runs;
    for (std::size_t r = 0; r < combos.size(); ++r) {
      json mj = manifest_json;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        mj[json::json_pointer(axis_pointer(axes[a], kind))] = values[a][combos[r][a]];
      }
      mj["output_dir"] = (out_dir / fmt::format("run_{:03}", r)).string();
      runs.push_back(parse_manifest(mj, manifest_path.parent_path()));
    }
    log::info("sweep: {} runs over {} axes", runs.size(), axes.size());

    std::vector<std::optional<double>> mean_auc(runs.size());
    std::vector<std::string> failures(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t r = next++; r < runs.size(); r = next++) {
        try {
          run_train(runs[r]);
          const EvalReport report = evaluate_checkpoint(runs[r].output_dir / "checkpoint.bin",
                                                        runs[r].region, runs[r].region_code);
          write_report_json(runs[r].output_dir / "eval_report.json", report);
          mean_auc[r] = report.mean_auc;
        } catch (const std::exception& e) {
          failures[r] = e.what();
        }
      }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(parallel, runs.size()));
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "summary.csv", std::ios::trunc);
    if (!csv) throw IoError(fmt::format("cannot write {}", (out_dir / "summary.csv").string()));
    csv << "run";
    for (const auto& a : axes) csv << ',' << a;
    csv << ",mean_auc,error\n";
    int code = kOk;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      csv << fmt::format("run_{:03}", r);
      for (std::size_t a = 0; a < axes.size(); ++a) csv << ',' << cell(values[a][combos[r][a]]);
      csv << ',' << (mean_auc[r] ? fmt::format("{:.17g}", *mean_auc[r]) : std::string());
      csv << ',' << failures[r] << '\n';
      if (!failures[r].empty()) {
        fmt::print(stderr, "sweep: run_{:03} failed: {}\n", r, failures[r]);
        code = kRuntime;
      }
    }
    return code;
  });
}

int cmd_gradcheck(const GradcheckOptions& options) {
  return guarded("gradcheck", [&] {
    GradcheckConfig config = GradcheckConfig::defaults();
    if (options.config) {
      const json j = read_json_file(*options.config);
      if (!j.is_object()) throw ConfigError("gradcheck config: expected a JSON object");
      for (const auto& [key, v] : j.items()) {
        if (key == "model") {
          config.model = model_config_from_json(v, config.model);
        } else if (key == "seed" && v.is_number_integer()) {
          config.seed = v.get<std::uint64_t>();
        } else if (key == "epsilon" && v.is_number()) {
          config.epsilon = v.get<double>();
        } else if (key == "num_species" && v.is_number_integer()) {
          config.region.num_species = v.get<std::size_t>();
        } else if (key == "num_po_locations" && v.is_number_integer()) {
          config.region.num_po_locations = v.get<std::size_t>();
        } else if (key == "num_background" && v.is_number_integer()) {
          config.region.num_background = v.get<std::size_t>();
        } else {
          throw ConfigError(fmt::format("gradcheck config: unknown or mistyped key '{}'", key));
        }
      }
    }
    config.corrupt_gradient = options.corrupt_gradient;
    const GradcheckResult result = run_gradcheck(config);
    for (const auto& [role, err] : result.max_error_per_role) log::info("{:<28} {:.3e}", role, err);
    fmt::print("checked {} entries; max relative error {:.3e} ({})\n", result.entries_checked,
               result.max_error, result.worst_tensor);
    return result.passed ? kOk : kTolerance;
  });
}

}  // namespace hsdm::cli
