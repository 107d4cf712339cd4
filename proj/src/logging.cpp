#include "hsdm/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

#include "hsdm/errors.hpp"

namespace hsdm::log {

void init_from_env() {
  static bool done = false;
  if (done) return;
  const char* raw = std::getenv("HETERO_SDM_LOG");
  const std::string value = raw ? raw : "info";
  spdlog::level::level_enum level = spdlog::level::info;
  if (value == "quiet") {
    level = spdlog::level::off;
  } else if (value == "debug") {
    level = spdlog::level::debug;
  } else if (value != "info" && !value.empty()) {
    throw ConfigError("HETERO_SDM_LOG must be quiet, info or debug, got '" + value + "'");
  }
  auto logger = spdlog::stderr_color_mt("hsdm");
  logger->set_pattern("[%l] %v");
  logger->set_level(level);
  spdlog::set_default_logger(logger);
  done = true;
}

}  // namespace hsdm::log
