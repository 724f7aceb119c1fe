// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// MASCTEN1 tensor container.
//
//   offset 0   8 bytes   ASCII "MASCTEN1"
//   offset 8   4 bytes   header_len, unsigned little-endian
//   offset 12  header_len bytes of UTF-8 JSON:
//                {"dtype":"f32","layout":"row-major","meta":{...},
//                 "name":"...","shape":[d0,d1,...]}
//   then       4 * product(shape) bytes, IEEE-754 binary32 little-endian
//
// The header is the only source of shape information. The payload length is
// checked against it on read, and trailing bytes are rejected.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace masc {

inline constexpr std::string_view kTensorMagic = "MASCTEN1";

struct Tensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<float> data;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t element_count() const;
};

std::vector<std::uint8_t> write_tensor(std::string_view name,
                                       std::span<const std::int64_t> shape,
                                       std::span<const float> data,
                                       const nlohmann::json& meta = nlohmann::json::object());
std::vector<std::uint8_t> write_tensor(const Tensor& tensor);

Tensor read_tensor(std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

// Whole-file read; throws MissingAssetError if the file cannot be opened.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace masc
