#include "hsdm/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

namespace {

constexpr char kMagic[8] = {'H', 'S', 'D', 'M', 'C', 'K', 'P', 'T'};
constexpr const char* kFormat = "hetero-sdm-checkpoint";

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

void put_u64(std::string& out, std::uint64_t v) {
  v = to_little(v);
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = to_little(m(i, j));
      out.append(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

nlohmann::json spec_to_json(const MlpSpec& s) {
  return {{"input_dim", s.input_dim},
          {"hidden_dim", s.hidden_dim},
          {"num_hidden_layers", s.num_hidden_layers},
          {"output_dim", s.output_dim},
          {"activation", std::string(to_string(s.activation))}};
}

MlpSpec spec_from_json(const nlohmann::json& j) {
  MlpSpec s;
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  s.num_hidden_layers = j.at("num_hidden_layers").get<std::size_t>();
  s.output_dim = j.at("output_dim").get<std::size_t>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  return s;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint {}", path.string()));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

nlohmann::json parse_header(const std::string& bytes, const std::filesystem::path& path,
                            std::size_t& payload_offset) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw CorruptCheckpointError(fmt::format("{}: not a checkpoint (bad magic)", path.string()));
  }
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 8);
  header_len = to_little(header_len);
  if (header_len > bytes.size() - 16) {
    throw CorruptCheckpointError(fmt::format("{}: truncated header", path.string()));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(fmt::format("{}: unreadable header: {}", path.string(), e.what()));
  }
  if (!header.is_object() || header.value("format", "") != kFormat) {
    throw CorruptCheckpointError(fmt::format("{}: unknown container format", path.string()));
  }
  const int version = header.value("version", -1);
  if (version != kCheckpointVersion) {
    throw VersionMismatchError(fmt::format("{}: checkpoint version {}, this build reads {}",
                                           path.string(), version, kCheckpointVersion));
  }
  if (header.value("dtype", "") != "float64" || header.value("endianness", "") != "little") {
    throw CorruptCheckpointError(fmt::format("{}: unsupported dtype/endianness", path.string()));
  }
  payload_offset = 16 + header_len;
  return header;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const CheckpointContents& contents) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = kCheckpointVersion;
  header["kind"] = contents.kind;
  header["dtype"] = "float64";
  header["endianness"] = "little";
  header["config"] = contents.config;
  nlohmann::json mlps = nlohmann::json::object();
  for (const auto& [role, mlp] : contents.params) mlps[role] = spec_to_json(mlp.spec);
  header["mlps"] = mlps;

  nlohmann::json tensors = nlohmann::json::array();
  std::string payload;
  for_each_tensor(contents.params, [&](const std::string& name, const Matrix& m) {
    tensors.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}});
    put_matrix(payload, m);
  });
  for (const auto& [name, m] : contents.extras) {
    tensors.push_back({{"name", "extra/" + name}, {"shape", {m.rows(), m.cols()}}});
    put_matrix(payload, m);
  }
  header["tensors"] = tensors;

  const std::string header_text = header.dump();
  std::string bytes(kMagic, sizeof(kMagic));
  put_u64(bytes, header_text.size());
  bytes += header_text;
  bytes += payload;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write checkpoint {}", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("short write to {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move checkpoint into {}: {}", path.string(), ec.message()));
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::size_t offset = 0;
  const nlohmann::json header = parse_header(bytes, path, offset);

  CheckpointContents out;
  std::map<std::string, Matrix> arrays;
  std::vector<std::string> order;
  try {
    out.kind = header.at("kind").get<std::string>();
    out.config = header.at("config");
    for (const auto& t : header.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto rows = t.at("shape").at(0).get<Eigen::Index>();
      const auto cols = t.at("shape").at(1).get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw CorruptCheckpointError("negative tensor shape");
      const auto n = static_cast<std::size_t>(rows * cols);
      if (bytes.size() - offset < n * sizeof(double)) {
        throw CorruptCheckpointError(fmt::format("{}: truncated at tensor '{}'", path.string(), name));
      }
      Matrix m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
          double v = 0.0;
          std::memcpy(&v, bytes.data() + offset, sizeof(v));
          m(i, j) = to_little(v);
          offset += sizeof(v);
        }
      }
      arrays.emplace(name, std::move(m));
      order.push_back(name);
    }
    if (offset != bytes.size()) {
      throw CorruptCheckpointError(
          fmt::format("{}: {} trailing bytes after tensors", path.string(), bytes.size() - offset));
    }
    for (const auto& [role, spec_json] : header.at("mlps").items()) {
      MlpParams mlp{spec_from_json(spec_json), {}};
      for (std::size_t l = 0; l <= mlp.spec.num_hidden_layers; ++l) {
        auto w = arrays.find(fmt::format("{}/{}/weight", role, l));
        auto b = arrays.find(fmt::format("{}/{}/bias", role, l));
        if (w == arrays.end() || b == arrays.end()) {
          throw CorruptCheckpointError(fmt::format("{}: role '{}' missing layer {}", path.string(), role, l));
        }
        mlp.layers.push_back({w->second, b->second});
      }
      out.params.emplace(role, std::move(mlp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(fmt::format("{}: malformed header: {}", path.string(), e.what()));
  }
  for (const auto& name : order) {
    if (name.starts_with("extra/")) out.extras.emplace(name.substr(6), arrays.at(name));
  }
  return out;
}

std::string read_checkpoint_kind(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::size_t offset = 0;
  const nlohmann::json header = parse_header(bytes, path, offset);
  if (!header.contains("kind") || !header["kind"].is_string()) {
    throw CorruptCheckpointError(fmt::format("{}: header lacks a model kind", path.string()));
  }
  return header["kind"].get<std::string>();
}

}  // namespace hsdm
