#pragma once

// Binary network checkpoints.
//
// Layout, all integers little-endian, doubles as their IEEE-754 bit pattern
// in a little-endian u64:
//
//   magic        4 bytes  "SNNC"
//   version      u8       1
//   -- config echo --
//   size_count   u32      number of layer sizes
//   sizes        u64 * size_count
//   per weight layer: kind u8, k u64, has_seed u8, seed u64
//   learning_rate f64, momentum f64, batch_size u64, epochs u64,
//   init_seed u64, glorot_fans u8
//   dropout_count u32, dropout rates f64 * dropout_count
//   -- parameters, per weight layer --
//   rows u64, cols u64, nnz u64
//   row_offsets u64 * (rows + 1)
//   col_indices u32 * nnz
//   values      f64 * nnz
//   bias        f64 * cols
//
// Momentum buffers are not stored; a loaded network starts with zero velocity.

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "snn/error.hpp"
#include "snn/network.hpp"

namespace snn {

inline constexpr std::array<char, 4> kCheckpointMagic = {'S', 'N', 'N', 'C'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

namespace detail {

class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }

 private:
  void put_le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class LeReader {
 public:
  explicit LeReader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(get_le(8)); }

  // Guards allocations driven by counts read from the file.
  std::size_t count(std::uint64_t value, std::uint64_t limit, const char* what) {
    if (value > limit) throw Error(ErrorCode::Parse, std::string("implausible ") + what + " in checkpoint");
    return static_cast<std::size_t>(value);
  }

 private:
  std::uint64_t get_le(int bytes) {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), bytes)) throw Error(ErrorCode::Truncated, "checkpoint cut short");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
    return v;
  }
  std::istream& in_;
};

inline constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Network& net) {
  detail::LeWriter w(out);
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.u8(kCheckpointVersion);

  const NetworkConfig& cfg = net.config;
  w.u32(static_cast<std::uint32_t>(cfg.layer_sizes.size()));
  for (std::size_t s : cfg.layer_sizes) w.u64(s);
  for (const ConstructionSpec& spec : cfg.topologies) {
    w.u8(static_cast<std::uint8_t>(spec.kind));
    w.u64(spec.k);
    w.u8(spec.seed ? 1 : 0);
    w.u64(spec.seed.value_or(0));
  }
  w.f64(cfg.learning_rate);
  w.f64(cfg.momentum);
  w.u64(cfg.batch_size);
  w.u64(cfg.epochs);
  w.u64(cfg.init_seed);
  w.u8(static_cast<std::uint8_t>(cfg.glorot_fans));
  w.u32(static_cast<std::uint32_t>(cfg.dropout_rates.size()));
  for (double rate : cfg.dropout_rates) w.f64(rate);

  for (const SparseLayer& layer : net.layers) {
    const CsrMatrix& m = layer.weights;
    w.u64(m.rows);
    w.u64(m.cols);
    w.u64(m.nnz());
    for (std::size_t off : m.row_offsets) w.u64(off);
    for (std::uint32_t c : m.col_indices) w.u32(c);
    for (double v : m.values) w.f64(v);
    for (double b : layer.bias) w.f64(b);
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing checkpoint");
}

inline Network read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw Error(ErrorCode::Truncated, "checkpoint cut short");
  if (magic != kCheckpointMagic) throw Error(ErrorCode::BadMagic, "not a network checkpoint");
  detail::LeReader r(in);
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::Parse, "unsupported checkpoint version " + std::to_string(version));

  Network net;
  NetworkConfig& cfg = net.config;
  const std::size_t size_count = r.count(r.u32(), 1 << 16, "layer count");
  for (std::size_t i = 0; i < size_count; ++i) cfg.layer_sizes.push_back(r.count(r.u64(), detail::kMaxCount, "layer size"));
  for (std::size_t l = 0; l + 1 < size_count; ++l) {
    ConstructionSpec spec;
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(ConstructionKind::FullyConnected))
      throw Error(ErrorCode::Parse, "unknown construction id " + std::to_string(kind));
    spec.kind = static_cast<ConstructionKind>(kind);
    spec.k = r.count(r.u64(), detail::kMaxCount, "degree");
    const bool has_seed = r.u8() != 0;
    const std::uint64_t seed = r.u64();
    if (has_seed) spec.seed = seed;
    cfg.topologies.push_back(spec);
  }
  cfg.learning_rate = r.f64();
  cfg.momentum = r.f64();
  cfg.batch_size = r.count(r.u64(), detail::kMaxCount, "batch size");
  cfg.epochs = r.count(r.u64(), detail::kMaxCount, "epochs");
  cfg.init_seed = r.u64();
  const std::uint8_t fans = r.u8();
  if (fans > static_cast<std::uint8_t>(GlorotFans::MaskedDegree)) throw Error(ErrorCode::Parse, "unknown fan mode");
  cfg.glorot_fans = static_cast<GlorotFans>(fans);
  const std::size_t dropout_count = r.count(r.u32(), 1 << 16, "dropout count");
  for (std::size_t i = 0; i < dropout_count; ++i) cfg.dropout_rates.push_back(r.f64());
  validate(cfg);

  for (std::size_t l = 0; l < cfg.weight_layer_count(); ++l) {
    SparseLayer layer;
    layer.construction = cfg.topologies[l];
    if (layer.construction.kind == ConstructionKind::FullyConnected) layer.construction.k = cfg.layer_sizes[l + 1];
    CsrMatrix& m = layer.weights;
    m.rows = r.count(r.u64(), detail::kMaxCount, "rows");
    m.cols = r.count(r.u64(), detail::kMaxCount, "cols");
    const std::size_t nnz = r.count(r.u64(), std::uint64_t{m.rows} * m.cols, "nnz");
    if (m.rows != cfg.layer_sizes[l] || m.cols != cfg.layer_sizes[l + 1])
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " shape disagrees with config");
    m.row_offsets.resize(m.rows + 1);
    for (auto& off : m.row_offsets) off = r.count(r.u64(), nnz, "row offset");
    m.col_indices.resize(nnz);
    for (auto& c : m.col_indices) c = r.u32();
    m.values.resize(nnz);
    for (auto& v : m.values) v = r.f64();
    validate(m);
    layer.bias.resize(m.cols);
    for (auto& b : layer.bias) b = r.f64();
    layer.weight_velocity.assign(nnz, 0.0);
    layer.bias_velocity.assign(m.cols, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

inline void save_checkpoint(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  write_checkpoint(out, net);
}

inline Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace snn
