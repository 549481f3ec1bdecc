#pragma once

// Binary model container. All integers and floats are little-endian.
//
//   offset  size  field
//   0       8     magic "CCNMODEL"
//   8       4     u32 format version (1)
//   12      4     u32 k1
//   16      4     u32 n1
//   20      4     u32 encoder layer count L_e
//           9*L_e per layer: u32 in, u32 out, u8 activation (0 linear, 1 relu)
//           4     u32 decoder layer count L_d
//           9*L_d per decoder layer, same layout
//           1     u8 has_frozen_stats (0 or 1)
//           ...   per encoder layer: weights (out x in, row-major f64), bias (out f64)
//           ...   per decoder layer: same
//           ...   if has_frozen_stats: mean (n1 f64), stddev (n1 f64)
//   end-4   4     u32 CRC-32 (zlib polynomial) of every preceding byte

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <zlib.h>

#include "ccn/errors.hpp"
#include "ccn/neural_net.hpp"

namespace ccn {

inline constexpr char kModelMagic[8] = {'C', 'C', 'N', 'M', 'O', 'D', 'E', 'L'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& buf, std::size_t limit) : buf_(buf), limit_(limit) {}
  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void expect(const char* p, std::size_t n) {
    need(n);
    if (std::memcmp(buf_.data() + pos_, p, n) != 0) throw ConfigError("model file: bad magic");
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw ConfigError("model file: truncated");
  }
  const std::vector<std::uint8_t>& buf_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const std::uint8_t* p, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const NeuralCodeModel& model) {
  model.validate();
  detail::ByteWriter w;
  w.raw(kModelMagic, sizeof kModelMagic);
  w.u32(kModelFormatVersion);
  w.u32(model.k1);
  w.u32(model.n1);
  auto header = [&w](const std::vector<LayerParams>& layers) {
    w.u32(static_cast<std::uint32_t>(layers.size()));
    for (const auto& l : layers) {
      w.u32(static_cast<std::uint32_t>(l.in()));
      w.u32(static_cast<std::uint32_t>(l.out()));
      w.u8(static_cast<std::uint8_t>(l.activation));
    }
  };
  header(model.encoder);
  header(model.decoder);
  w.u8(model.frozen_stats ? 1 : 0);
  auto body = [&w](const std::vector<LayerParams>& layers) {
    for (const auto& l : layers) {
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.f64(l.weights(r, c));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias(r));
    }
  };
  body(model.encoder);
  body(model.decoder);
  if (model.frozen_stats) {
    for (Eigen::Index i = 0; i < model.frozen_stats->mean.size(); ++i) w.f64(model.frozen_stats->mean(i));
    for (Eigen::Index i = 0; i < model.frozen_stats->stddev.size(); ++i) w.f64(model.frozen_stats->stddev(i));
  }
  auto& bytes = w.bytes();
  w.u32(detail::crc32_of(bytes.data(), bytes.size()));
  return std::move(bytes);
}

inline NeuralCodeModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kModelMagic + 4) throw ConfigError("model file: truncated");
  const std::size_t payload = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[payload + static_cast<std::size_t>(i)]) << (8 * i);
  if (stored != detail::crc32_of(bytes.data(), payload)) throw ConfigError("model file: checksum mismatch");

  detail::ByteReader r(bytes, payload);
  r.expect(kModelMagic, sizeof kModelMagic);
  if (r.u32() != kModelFormatVersion) throw ConfigError("model file: unsupported format version");
  NeuralCodeModel model;
  model.k1 = r.u32();
  model.n1 = r.u32();
  auto header = [&r](std::vector<LayerParams>& layers) {
    const std::uint32_t count = r.u32();
    if (count > 64) throw ConfigError("model file: implausible layer count");
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t in = r.u32();
      const std::uint32_t out = r.u32();
      const std::uint8_t act = r.u8();
      if (act > 1) throw ConfigError("model file: unknown activation tag");
      if (in == 0 || out == 0 || in > (1u << 16) || out > (1u << 16)) throw ConfigError("model file: implausible layer size");
      layers.push_back({Matrix(out, in), Vector(out), static_cast<Activation>(act)});
    }
  };
  header(model.encoder);
  header(model.decoder);
  const std::uint8_t has_stats = r.u8();
  auto body = [&r](std::vector<LayerParams>& layers) {
    for (auto& l : layers) {
      for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = r.f64();
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = r.f64();
    }
  };
  body(model.encoder);
  body(model.decoder);
  if (has_stats) {
    BatchStats s{Vector(model.n1), Vector(model.n1)};
    for (Eigen::Index i = 0; i < s.mean.size(); ++i) s.mean(i) = r.f64();
    for (Eigen::Index i = 0; i < s.stddev.size(); ++i) s.stddev(i) = r.f64();
    model.frozen_stats = std::move(s);
  }
  if (r.pos() != payload) throw ConfigError("model file: trailing bytes before checksum");
  try {
    model.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
  return model;
}

inline void save_model(const NeuralCodeModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open model file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing model file: " + path);
}

inline NeuralCodeModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_model(bytes);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (" + path + ")");
  }
}

}  // namespace ccn
