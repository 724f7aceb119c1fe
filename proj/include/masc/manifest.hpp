// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Dataset manifest: a JSON document binding patch-grid and mask files to
// evaluation keys. See docs/formats.md for the schema.

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace masc {

struct RecordKey {
  std::string method;
  std::string concept_id;
  std::int64_t prompt_idx = 0;
  std::int64_t seed = 0;

  auto operator<=>(const RecordKey&) const = default;
  bool operator==(const RecordKey&) const = default;

  // "method/concept_id/prompt_idx/seed", used in diagnostics and reports.
  std::string str() const;
};

struct EvalRecord {
  RecordKey key;
  std::filesystem::path ref_patch_path;
  std::filesystem::path gen_patch_path;
  std::filesystem::path ref_mask_path;
  std::filesystem::path gen_mask_path;
  std::string prompt;
  std::string subject_name;
  std::map<std::string, double> ratings;
};

struct DatasetManifest {
  std::vector<EvalRecord> records;
  // Directory holding <sha256>.mten text embeddings, if the manifest names one.
  std::optional<std::filesystem::path> text_embedding_dir;
};

// Relative paths resolve against `root`, or the manifest's directory when
// `root` is empty. Every referenced file must exist; all absent paths are
// reported together in one MissingAssetError.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              const std::filesystem::path& root = {});
DatasetManifest parse_manifest(const std::string& json_text, const std::filesystem::path& root);

}  // namespace masc
