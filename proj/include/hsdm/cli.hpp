#pragma once

// Batch commands behind the hetero_sdm executable.
//
// Manifest (JSON; relative paths resolve against the manifest's directory):
//   {
//     "region": {"dir": "data/awt", "code": "AWT"}      or explicit
//               {"po": ..., "bg": ..., "pa_env": ..., "pa_labels": ..., "species": ...},
//     "model_kind": "gnn" | "baseline",
//     "train": {...},          gnn: learning_rate, num_epochs, seed, sampling{...}, model{...}
//     "baseline": {...},       baseline: hidden_dim, num_layers, ...
//     "output_dir": "runs/awt",
//     "seed": 0,               optional; overrides every seed in the manifest
//     "include_coords": false,
//     "normalize_gnn_inputs": true
//   }
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure,
// 3 gradient check tolerance breach.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "hsdm/baseline_mlp.hpp"
#include "hsdm/evaluator.hpp"
#include "hsdm/nceas_ingest.hpp"
#include "hsdm/trainer.hpp"

namespace hsdm::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kTolerance = 3 };

enum class ModelKind { gnn, baseline };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct RunManifest {
  RegionPaths region;
  std::string region_code;
  ModelKind model_kind = ModelKind::gnn;
  TrainConfig train;
  BaselineConfig baseline;
  std::filesystem::path output_dir;
  IngestOptions ingest;
};

/// Parses a manifest object; `base_dir` anchors relative paths. Throws ConfigError.
RunManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Throws IoError, ConfigError.
RunManifest load_manifest(const std::filesystem::path& path);

/// Sets the seed of every component (training, sampling, baseline).
void apply_seed(RunManifest& manifest, std::uint64_t seed);

/// Throws ConfigError naming the first region file that does not exist.
void require_region_files(const RegionPaths& paths);

struct TrainOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<bool> include_coords;
  std::optional<bool> normalize_gnn_inputs;
  std::optional<std::filesystem::path> output_dir;
};

/// Writes <output_dir>/checkpoint.bin and <output_dir>/train_log.jsonl.
int cmd_train(const std::filesystem::path& manifest_path, const TrainOverrides& overrides = {});
/// Same, from an already parsed manifest.
int run_train(const RunManifest& manifest);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> region_dir;
  std::optional<std::filesystem::path> manifest;  // supplies the region when region_dir is absent
  std::filesystem::path out;                       // JSON report
  std::optional<std::filesystem::path> csv;
  std::optional<ModelKind> expected_kind;
};

/// Writes the report and prints the mean AUC with 4 decimals to stdout.
int cmd_eval(const EvalOptions& options);

/// Mean AUC of a checkpoint on a region's presence-absence sites, with report.
EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint, const RegionPaths& region,
                               const std::string& region_code);

/// Sweep spec: {"manifest": path, "output_dir": dir, <axis>: [values...], ...}.
/// Every other top-level key is a grid axis. Writes run_NNN/ and summary.csv.
int cmd_sweep(const std::filesystem::path& sweep_path, std::size_t parallel = 1,
              std::optional<std::filesystem::path> output_dir = std::nullopt);

struct GradcheckOptions {
  std::optional<std::filesystem::path> config;
  bool corrupt_gradient = false;
};

int cmd_gradcheck(const GradcheckOptions& options);

}  // namespace hsdm::cli
