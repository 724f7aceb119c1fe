// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/text_embedding.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>

#include "masc/errors.hpp"
#include "masc/tensor_store.hpp"

namespace masc {

std::string prompt_hash(std::string_view text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::filesystem::path text_embedding_path(const std::filesystem::path& dir, std::string_view hash) {
  return dir / (std::string(hash) + ".mten");
}

TextEmbedding load_text_embedding(const std::filesystem::path& dir, std::string_view hash) {
  const auto path = text_embedding_path(dir, hash);
  if (!std::filesystem::is_regular_file(path))
    throw MissingAssetError({path.string()}, "missing text embedding for prompt_hash " +
                                                 std::string(hash) + " (" + path.string() + ")");
  Tensor t = load_tensor(path);
  const bool vector_shape = t.shape.size() == 1 || (t.shape.size() == 2 && t.shape[0] == 1);
  if (!vector_shape) throw SchemaError(path.string() + ": text embedding must have shape [D] or [1, D]");
  if (t.meta.contains("prompt_hash") && t.meta["prompt_hash"].is_string() &&
      t.meta["prompt_hash"].get<std::string>() != hash)
    throw SchemaError(path.string() + ": meta prompt_hash does not match file name");
  return TextEmbedding{std::move(t.data), std::string(hash)};
}

void save_text_embedding(const std::filesystem::path& dir, const TextEmbedding& embedding,
                         std::string_view text) {
  Tensor t;
  t.name = "text/" + embedding.prompt_hash;
  t.shape = {static_cast<std::int64_t>(embedding.vector.size())};
  t.data = embedding.vector;
  t.meta = {{"prompt_hash", embedding.prompt_hash}};
  if (!text.empty()) t.meta["text"] = std::string(text);
  save_tensor(text_embedding_path(dir, embedding.prompt_hash), t);
}

}  // namespace masc
