// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/filtering.hpp"

#include <map>
#include <set>

#include "masc/errors.hpp"
#include "masc/mask_ops.hpp"

namespace masc {

void FilterPolicy::validate() const {
  if (!(min_area_fraction > 0.0 && min_area_fraction < 1.0))
    throw ArgumentError("min_area_fraction must lie in (0, 1)");
}

FilterPolicy FilterPolicy::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("filter policy must be a JSON object");
  FilterPolicy p;
  try {
    p.min_area_fraction = j.value("min_area_fraction", p.min_area_fraction);
    p.drop_all_prompts_on_ref_failure = j.value("drop_all_prompts_on_ref_failure", p.drop_all_prompts_on_ref_failure);
    p.exclude_style_subjects = j.value("exclude_style_subjects", p.exclude_style_subjects);
    p.style_subject_ids = j.value("style_subject_ids", p.style_subject_ids);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid filter policy: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json FilterPolicy::to_json() const {
  return {{"min_area_fraction", min_area_fraction},
          {"drop_all_prompts_on_ref_failure", drop_all_prompts_on_ref_failure},
          {"exclude_style_subjects", exclude_style_subjects},
          {"style_subject_ids", style_subject_ids}};
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::GenMaskSmall: return "gen_mask_small";
    case DropReason::RefMaskSmall: return "ref_mask_small";
    case DropReason::StyleExcluded: return "style_excluded";
  }
  return "unknown";
}

FilterResult apply_filter(const DatasetManifest& manifest, const FilterPolicy& policy) {
  policy.validate();
  const std::set<std::string> style(policy.style_subject_ids.begin(), policy.style_subject_ids.end());

  // Each mask file is decoded once even when many records share it.
  std::map<std::filesystem::path, double> fraction;
  std::vector<std::string> missing;
  auto area = [&](const std::filesystem::path& p) -> double {
    if (auto it = fraction.find(p); it != fraction.end()) return it->second;
    double f = 0.0;
    try {
      f = foreground_fraction(load_mask_png(p));
    } catch (const MissingAssetError&) {
      missing.push_back(p.string());
    }
    fraction.emplace(p, f);
    return f;
  };

  std::set<std::string> failed_concepts;
  std::vector<char> ref_small(manifest.records.size(), 0);
  std::vector<char> gen_small(manifest.records.size(), 0);
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    ref_small[i] = area(r.ref_mask_path) < policy.min_area_fraction;
    gen_small[i] = area(r.gen_mask_path) < policy.min_area_fraction;
    if (ref_small[i]) failed_concepts.insert(r.key.concept_id);
  }
  if (!missing.empty()) throw MissingAssetError(std::move(missing));

  FilterResult result;
  result.kept.text_embedding_dir = manifest.text_embedding_dir;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    if (policy.exclude_style_subjects && style.count(r.key.concept_id)) {
      result.drops.push_back({r.key, DropReason::StyleExcluded});
    } else if (ref_small[i] ||
               (policy.drop_all_prompts_on_ref_failure && failed_concepts.count(r.key.concept_id))) {
      result.drops.push_back({r.key, DropReason::RefMaskSmall});
    } else if (gen_small[i]) {
      result.drops.push_back({r.key, DropReason::GenMaskSmall});
    } else {
      result.kept.records.push_back(r);
    }
  }
  return result;
}

nlohmann::json key_to_json(const RecordKey& key) {
  return {{"method", key.method}, {"concept_id", key.concept_id}, {"prompt_idx", key.prompt_idx}, {"seed", key.seed}};
}

std::string drop_report_jsonl(const std::vector<DropEntry>& drops) {
  std::string out;
  for (const auto& d : drops) {
    out += nlohmann::json{{"key", key_to_json(d.key)}, {"reason", to_string(d.reason)}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace masc
