#pragma once

// Binary container shared by every model kind:
//
//   bytes 0..7   magic "HSDMCKPT"
//   bytes 8..15  header length N, uint64 little-endian
//   next N bytes JSON header: format, version, kind, dtype, endianness,
//                config, mlps (role -> spec), tensors [{name, shape}]
//   remainder    each tensor as row-major little-endian float64, header order

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsdm/matrix.hpp"
#include "hsdm/mlp.hpp"

namespace hsdm {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointContents {
  std::string kind;  // "gnn" or "baseline"
  nlohmann::json config;
  ParamStore params;
  /// Non-parameter arrays (normalizer bounds, ...), stored after the parameters.
  std::map<std::string, Matrix> extras;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointContents& contents);
CheckpointContents read_checkpoint(const std::filesystem::path& path);

/// Reads only the kind from the header.
std::string read_checkpoint_kind(const std::filesystem::path& path);

}  // namespace hsdm
