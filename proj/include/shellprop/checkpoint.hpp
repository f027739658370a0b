// Copyright 2026 The shellprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Model checkpoint, all fields little-endian:
//   offset 0   8 bytes  magic "SHPRCKPT"
//   offset 8   u32      format version (1)
//   offset 12  u64 x 3  d, h, C
//   offset 36  f64 ...  w1 (d*h, row-major), b1 (h), w2 (h*C, row-major), b2 (C)

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shellprop/error.hpp"
#include "shellprop/model.hpp"

namespace shellprop {

inline constexpr std::array<char, 8> kCheckpointMagic = {'S', 'H', 'P', 'R',
                                                         'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <class U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xff));
}

template <class U>
U get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    value |= static_cast<U>(in[pos + i]) << (8 * i);
  pos += sizeof(U);
  return value;
}

}  // namespace detail

template <class T>
std::vector<unsigned char> encode_checkpoint(const ModelParams<T>& params) {
  params.check_shapes();
  std::vector<unsigned char> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint64_t>(out, params.input_dim());
  detail::put_le<std::uint64_t>(out, params.hidden());
  detail::put_le<std::uint64_t>(out, params.num_classes());
  for (const auto tensor : params.tensors())
    for (const T v : tensor)
      detail::put_le<std::uint64_t>(out,
                                    std::bit_cast<std::uint64_t>(static_cast<double>(v)));
  return out;
}

template <class T>
ModelParams<T> decode_checkpoint(const std::vector<unsigned char>& bytes) {
  constexpr std::size_t kHeader = 8 + 4 + 3 * 8;
  require(bytes.size() >= kHeader &&
              std::memcmp(bytes.data(), kCheckpointMagic.data(), 8) == 0,
          ErrorKind::Input, "checkpoint: bad magic");
  std::size_t pos = 8;
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  require(version == kCheckpointVersion, ErrorKind::Input,
          "checkpoint: unsupported version " + std::to_string(version));
  const auto d = detail::get_le<std::uint64_t>(bytes, pos);
  const auto h = detail::get_le<std::uint64_t>(bytes, pos);
  const auto c = detail::get_le<std::uint64_t>(bytes, pos);
  const std::uint64_t count = d * h + h + h * c + c;
  require(bytes.size() == kHeader + 8 * count, ErrorKind::Input,
          "checkpoint: payload size does not match header dimensions");
  auto params = ModelParams<T>::zeros(d, h, c);
  for (auto tensor : params.tensors())
    for (T& v : tensor)
      v = static_cast<T>(std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos)));
  return params;
}

template <class T>
void save_checkpoint(const ModelParams<T>& params, const std::filesystem::path& file) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(file, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Input,
          "cannot write checkpoint " + file.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

template <class T>
ModelParams<T> load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Input,
          "cannot open checkpoint " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_checkpoint<T>(bytes);
}

}  // namespace shellprop
