// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace masc {

// Lowercase hex SHA-256 of the exact UTF-8 bytes that were (or will be) encoded.
std::string prompt_hash(std::string_view text);

struct TextEmbedding {
  std::vector<float> vector;
  std::string prompt_hash;
};

// Embedding files live at <dir>/<prompt_hash>.mten with shape [D_t] or [1, D_t].
std::filesystem::path text_embedding_path(const std::filesystem::path& dir, std::string_view hash);
TextEmbedding load_text_embedding(const std::filesystem::path& dir, std::string_view hash);
void save_text_embedding(const std::filesystem::path& dir, const TextEmbedding& embedding,
                         std::string_view text = {});

}  // namespace masc
