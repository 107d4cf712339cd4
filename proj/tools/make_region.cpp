// Writes a generated region in the canonical CSV layout.

#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hsdm/errors.hpp"
#include "hsdm/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic region"};
  std::string out;
  std::string shape = "toy";
  double scale = 1.0;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--shape", shape, "toy, recovery, awt or swi")
      ->check(CLI::IsMember({"toy", "recovery", "awt", "swi"}));
  app.add_option("--scale", scale, "Row-count scale for awt/swi")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  hsdm::SyntheticRegionConfig config;
  if (shape == "toy") {
    config = hsdm::toy_region_config(seed);
  } else if (shape == "awt") {
    config = hsdm::awt_like_config(scale, seed);
  } else if (shape == "swi") {
    config = hsdm::swi_like_config(scale, seed);
  } else {
    config.seed = seed;
  }
  try {
    const auto region = hsdm::generate_region(config);
    hsdm::write_region(region.dataset, out);
    fmt::print("{}: {} PO records, {} background, {} PA sites, {} species -> {}\n", config.region_code,
               region.dataset.po.size(), region.dataset.background.size(),
               region.dataset.pa_test.size(), region.dataset.num_species(), out);
  } catch (const hsdm::Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 1;
  }
  return 0;
}
