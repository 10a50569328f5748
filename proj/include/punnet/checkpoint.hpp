#pragma once

// Binary checkpoint format PCKPT1:
//   magic "PCKPT1\n"
//   u32-LE tensor count
//   per tensor: u16-LE name length, UTF-8 name, u8 rank, rank x u32-LE dims,
//               float32-LE data (row-major)
//   u32-LE config-blob length, UTF-8 text of the full resolved configuration
//
// Write-then-read is bitwise idempotent.

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/encoder.hpp"  // little-endian read/write helpers
#include "punnet/tensor.hpp"

namespace punnet {

struct RawTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

struct CheckpointData {
  std::vector<RawTensor> tensors;
  std::string config_text;

  const RawTensor* find(const std::string& name) const {
    for (const auto& t : tensors) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }
};

template <typename T>
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor<T>>>& params,
                     const std::string& config_text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write("PCKPT1\n", 7);
  detail::write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, tensor] : params) {
    detail::write_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(tensor.shape().size()));
    for (std::size_t d : tensor.shape()) detail::write_u32(os, static_cast<std::uint32_t>(d));
    for (T v : tensor.value()) detail::write_f32(os, static_cast<float>(v));
  }
  detail::write_u32(os, static_cast<std::uint32_t>(config_text.size()));
  os.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

inline CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  detail::expect_magic(is, "PCKPT1\n", "PCKPT1");
  CheckpointData out;
  const std::uint32_t count = detail::read_u32(is, "tensor count");
  out.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    RawTensor t;
    const std::uint16_t name_len = detail::read_u16(is, "tensor name length");
    t.name.resize(name_len);
    if (!detail::read_exact(is, t.name.data(), name_len)) {
      throw FormatError("truncated checkpoint reading tensor name");
    }
    int rank = is.get();
    if (rank < 0) throw FormatError("truncated checkpoint reading tensor rank");
    t.shape.resize(static_cast<std::size_t>(rank));
    for (auto& d : t.shape) d = detail::read_u32(is, "tensor dim");
    t.data.resize(shape_numel(t.shape));
    for (float& v : t.data) v = detail::read_f32(is, "tensor data");
    out.tensors.push_back(std::move(t));
  }
  const std::uint32_t config_len = detail::read_u32(is, "config length");
  out.config_text.resize(config_len);
  if (!detail::read_exact(is, out.config_text.data(), config_len)) {
    throw FormatError("truncated checkpoint reading config blob");
  }
  return out;
}

}  // namespace punnet
