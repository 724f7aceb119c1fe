// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/tensor_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <system_error>

#include "masc/errors.hpp"

namespace masc {
namespace {

constexpr std::size_t kMagicSize = 8;
constexpr std::size_t kPrefixSize = kMagicSize + 4;

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t checked_product(std::span<const std::int64_t> shape) {
  if (shape.empty()) throw SchemaError("tensor shape must have at least one dimension");
  std::size_t n = 1;
  for (auto d : shape) {
    if (d <= 0) throw SchemaError("tensor shape entries must be positive, got " + std::to_string(d));
    if (n > std::numeric_limits<std::size_t>::max() / 4 / static_cast<std::size_t>(d))
      throw SchemaError("tensor shape overflows");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

std::size_t Tensor::element_count() const { return checked_product(shape); }

std::vector<std::uint8_t> write_tensor(std::string_view name, std::span<const std::int64_t> shape,
                                       std::span<const float> data, const nlohmann::json& meta) {
  const std::size_t count = checked_product(shape);
  if (count != data.size())
    throw SchemaError("shape product " + std::to_string(count) + " != data length " +
                      std::to_string(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]))
      throw DataError("non-finite value at flat index " + std::to_string(i) + " in tensor '" +
                      std::string(name) + "'");
  }
  if (!meta.is_object()) throw SchemaError("tensor meta must be a JSON object");

  nlohmann::json header = {
      {"name", std::string(name)},
      {"dtype", "f32"},
      {"shape", std::vector<std::int64_t>(shape.begin(), shape.end())},
      {"layout", "row-major"},
      {"meta", meta},
  };
  const std::string header_text = header.dump();
  if (header_text.size() > std::numeric_limits<std::uint32_t>::max())
    throw SchemaError("tensor header too large");

  std::vector<std::uint8_t> out;
  out.reserve(kPrefixSize + header_text.size() + 4 * data.size());
  out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
  put_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out.insert(out.end(), header_text.begin(), header_text.end());

  const std::size_t base = out.size();
  out.resize(base + 4 * data.size());
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + base, data.data(), 4 * data.size());
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(data[i]);
      for (int b = 0; b < 4; ++b) out[base + 4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return out;
}

std::vector<std::uint8_t> write_tensor(const Tensor& tensor) {
  return write_tensor(tensor.name, tensor.shape, tensor.data, tensor.meta);
}

Tensor read_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPrefixSize) throw FormatError("tensor file shorter than its fixed prefix");
  if (std::memcmp(bytes.data(), kTensorMagic.data(), kMagicSize) != 0)
    throw FormatError("bad tensor magic (expected MASCTEN1)");
  const std::uint32_t header_len = get_u32_le(bytes.data() + kMagicSize);
  if (bytes.size() - kPrefixSize < header_len) throw FormatError("tensor header truncated");

  const auto* header_begin = reinterpret_cast<const char*>(bytes.data() + kPrefixSize);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_begin, header_begin + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed tensor header JSON: ") + e.what());
  }
  if (!header.is_object()) throw FormatError("tensor header is not a JSON object");

  Tensor t;
  try {
    if (header.at("dtype").get<std::string>() != "f32")
      throw FormatError("unsupported dtype '" + header.at("dtype").get<std::string>() + "'");
    if (header.at("layout").get<std::string>() != "row-major")
      throw FormatError("unsupported layout '" + header.at("layout").get<std::string>() + "'");
    t.name = header.at("name").get<std::string>();
    for (const auto& d : header.at("shape")) {
      if (!d.is_number_integer()) throw FormatError("shape entries must be integers");
      t.shape.push_back(d.get<std::int64_t>());
    }
    if (header.contains("meta")) {
      if (!header["meta"].is_object()) throw FormatError("tensor meta must be an object");
      t.meta = header["meta"];
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid tensor header: ") + e.what());
  }

  std::size_t count = 0;
  try {
    count = checked_product(t.shape);
  } catch (const SchemaError& e) {
    throw FormatError(e.what());
  }
  const std::size_t payload_offset = kPrefixSize + header_len;
  const std::size_t payload_len = bytes.size() - payload_offset;
  if (payload_len < 4 * count)
    throw FormatError("tensor payload truncated: expected " + std::to_string(4 * count) +
                      " bytes, found " + std::to_string(payload_len));
  if (payload_len > 4 * count)
    throw FormatError("tensor payload has " + std::to_string(payload_len - 4 * count) +
                      " trailing bytes");

  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + payload_offset;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(t.data.data(), p, 4 * count);
  } else {
    for (std::size_t i = 0; i < count; ++i) t.data[i] = std::bit_cast<float>(get_u32_le(p + 4 * i));
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(t.data[i]))
      throw DataError("non-finite value at flat index " + std::to_string(i) + " in tensor '" +
                      t.name + "'");
  }
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingAssetError({path.string()});
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size))
    throw FormatError("failed reading " + path.string());
  return bytes;
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_atomic(path, write_tensor(tensor));
}

Tensor load_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return read_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace masc
