// Checkpoint layout (all integers little-endian):
//   "GRSS"  u16 version  u64 feature-schema hash
//   u32 hidden  u32 layers  u32 solvers  u32 flags
//     flags bit 0: homogeneous convolutions; bits 8..15: feature mode
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u32 rank, rank x u32 dims, f32 data
//   u32 solver-name count, then per name: u32 length, bytes

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "grass/error.hpp"
#include "grass/nn.hpp"

namespace grass {

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw Error(ErrorCode::BadCheckpoint, "truncated checkpoint");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

std::string get_string(std::istream& in, std::uint32_t max_len = 1 << 16) {
  const auto n = get<std::uint32_t>(in);
  if (n > max_len) throw Error(ErrorCode::BadCheckpoint, "implausible string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw Error(ErrorCode::BadCheckpoint, "truncated checkpoint");
  return s;
}

}  // namespace

void write_checkpoint(const ModelParameters& p, std::ostream& out) {
  const auto& cfg = p.config();
  out.write(kCheckpointMagic, 4);
  put<std::uint16_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, p.schema_hash());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.hidden));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.layers));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.num_solvers));
  const std::uint32_t flags = (cfg.homogeneous ? 1u : 0u) |
                              (static_cast<std::uint32_t>(cfg.feature_mode) << 8);
  put<std::uint32_t>(out, flags);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.tensors().size()));
  for (const auto& t : p.tensors()) {
    put_string(out, t.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (const auto d : t.dims) put<std::uint32_t>(out, d);
    for (const float x : t.data) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.solver_names.size()));
  for (const auto& name : p.solver_names) put_string(out, name);
  if (!out) throw Error(ErrorCode::Io, "checkpoint write failed");
}

ModelParameters read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw Error(ErrorCode::BadCheckpoint, "not a GRSS checkpoint");
  }
  const auto version = get<std::uint16_t>(in);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::BadCheckpoint,
                "unsupported checkpoint version " + std::to_string(version));
  }
  const auto schema = get<std::uint64_t>(in);
  ModelConfig cfg;
  cfg.hidden = get<std::uint32_t>(in);
  cfg.layers = get<std::uint32_t>(in);
  cfg.num_solvers = get<std::uint32_t>(in);
  const auto flags = get<std::uint32_t>(in);
  cfg.homogeneous = (flags & 1u) != 0;
  const auto mode = (flags >> 8) & 0xffu;
  if (mode > static_cast<std::uint32_t>(FeatureMode::NodeTypeOneHot) ||
      (flags & ~0xff01u) != 0) {
    throw Error(ErrorCode::BadCheckpoint, "unknown checkpoint flags");
  }
  cfg.feature_mode = static_cast<FeatureMode>(mode);
  if (cfg.hidden == 0 || cfg.hidden > 4096 || cfg.layers > 64 || cfg.num_solvers == 0 ||
      cfg.num_solvers > 4096) {
    throw Error(ErrorCode::BadCheckpoint, "implausible model dimensions");
  }

  ModelParameters p = ModelParameters::zeros(cfg);
  p.set_schema_hash(schema);
  const auto count = get<std::uint32_t>(in);
  if (count != p.tensors().size()) {
    throw Error(ErrorCode::BadCheckpoint, "tensor count does not match model layout");
  }
  for (auto& t : p.tensors()) {
    const auto name = get_string(in);
    if (name != t.name) {
      throw Error(ErrorCode::BadCheckpoint, "expected tensor '" + t.name + "', found '" + name + "'");
    }
    const auto rank = get<std::uint32_t>(in);
    if (rank != t.dims.size()) throw Error(ErrorCode::BadCheckpoint, "rank mismatch for " + name);
    for (const auto d : t.dims) {
      if (get<std::uint32_t>(in) != d) {
        throw Error(ErrorCode::BadCheckpoint, "shape mismatch for " + name);
      }
    }
    for (auto& x : t.data) x = std::bit_cast<float>(get<std::uint32_t>(in));
  }
  const auto names = get<std::uint32_t>(in);
  if (names != 0 && names != cfg.num_solvers) {
    throw Error(ErrorCode::BadCheckpoint, "solver-name count does not match solver count");
  }
  for (std::uint32_t i = 0; i < names; ++i) p.solver_names.push_back(get_string(in));
  return p;
}

void save_checkpoint(const ModelParameters& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  write_checkpoint(p, out);
}

ModelParameters load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace grass
