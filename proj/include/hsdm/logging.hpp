#pragma once

// Thin wrapper over spdlog. The level comes from HETERO_SDM_LOG
// (quiet, info, debug); info when unset.

#include <string_view>

#include <spdlog/spdlog.h>

namespace hsdm::log {

/// Reads HETERO_SDM_LOG once; later calls are no-ops. Throws ConfigError on an unknown value.
void init_from_env();

template <typename... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  spdlog::info(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void debug(fmt::format_string<Args...> fmt, Args&&... args) {
  spdlog::debug(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void warn(fmt::format_string<Args...> fmt, Args&&... args) {
  spdlog::warn(fmt, std::forward<Args>(args)...);
}

}  // namespace hsdm::log
