// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "masc/manifest.hpp"

namespace masc {

struct FilterPolicy {
  double min_area_fraction = 0.05;
  bool drop_all_prompts_on_ref_failure = true;
  bool exclude_style_subjects = false;
  std::vector<std::string> style_subject_ids;

  void validate() const;
  static FilterPolicy from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class DropReason { GenMaskSmall, RefMaskSmall, StyleExcluded };

std::string_view to_string(DropReason reason);

struct DropEntry {
  RecordKey key;
  DropReason reason;

  bool operator==(const DropEntry&) const = default;
};

struct FilterResult {
  DatasetManifest kept;
  std::vector<DropEntry> drops;
};

// Checks run in a fixed order and the first that fires is the reported reason:
//   1. style_excluded   concept_id listed and exclusion enabled
//   2. ref_mask_small   the record's reference mask, or (when
//                       drop_all_prompts_on_ref_failure) any reference mask of
//                       the same concept_id, is below the threshold
//   3. gen_mask_small   the record's generated mask is below the threshold
// Area is measured on the pixel mask. Kept records keep manifest order.
FilterResult apply_filter(const DatasetManifest& manifest, const FilterPolicy& policy);

// One JSON object per line: {"key":{...},"reason":"..."}.
std::string drop_report_jsonl(const std::vector<DropEntry>& drops);
nlohmann::json key_to_json(const RecordKey& key);

}  // namespace masc
