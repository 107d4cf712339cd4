#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hsdm/cli.hpp"

using namespace hsdm::cli;

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous graph species distribution models"};
  app.require_subcommand(1);

  std::string manifest;
  std::string checkpoint;
  std::string region_dir;
  std::string out;
  std::string csv;
  std::string model_kind;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t parallel = 1;
  bool include_coords = false;
  bool no_normalize = false;
  bool corrupt_gradient = false;

  auto* train = app.add_subcommand("train", "Train a model from a run manifest");
  train->add_option("--manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
  auto* train_seed = train->add_option("--seed-override", seed, "Replace every seed in the manifest");
  auto* train_out = train->add_option("--out", out, "Output directory (overrides the manifest)");
  train->add_flag("--include-coords", include_coords, "Append x, y to the location features");
  train->add_flag("--no-normalize-gnn-inputs", no_normalize, "Feed raw env features to the GNN");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on presence-absence sites");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--region-dir", region_dir, "Directory with the canonical region CSVs");
  eval->add_option("--manifest", manifest, "Manifest supplying the region when --region-dir is absent");
  eval->add_option("--out", out, "Report path (JSON)")->required();
  eval->add_option("--csv", csv, "Also write a per-species CSV");
  eval->add_option("--model-kind", model_kind, "Expected model kind")
      ->check(CLI::IsMember({"gnn", "baseline"}));

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate a grid of configurations");
  sweep->add_option("--manifest", manifest, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Sweep output directory");
  sweep->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradient");
  gradcheck->add_option("--manifest,--config", config, "Gradient-check config (JSON)")
      ->check(CLI::ExistingFile);
  gradcheck->add_flag("--corrupt-gradient", corrupt_gradient)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors count as validation failures; --help exits cleanly.
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  if (*train) {
    TrainOverrides overrides;
    if (*train_seed) overrides.seed = seed;
    if (include_coords) overrides.include_coords = true;
    if (no_normalize) overrides.normalize_gnn_inputs = false;
    if (*train_out) overrides.output_dir = out;
    return cmd_train(manifest, overrides);
  }
  if (*eval) {
    EvalOptions options;
    options.checkpoint = checkpoint;
    if (!region_dir.empty()) options.region_dir = region_dir;
    if (!manifest.empty()) options.manifest = manifest;
    options.out = out;
    if (!csv.empty()) options.csv = csv;
    if (!model_kind.empty()) options.expected_kind = parse_model_kind(model_kind);
    return cmd_eval(options);
  }
  if (*sweep) {
    std::optional<std::filesystem::path> out_dir;
    if (!out.empty()) out_dir = out;
    return cmd_sweep(manifest, parallel, out_dir);
  }
  GradcheckOptions options;
  if (!config.empty()) options.config = config;
  options.corrupt_gradient = corrupt_gradient;
  return cmd_gradcheck(options);
}
