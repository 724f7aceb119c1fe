// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Identity-discrimination pair protocol: every subject is photographed in the
// same number of environments. Within pairs are all environment pairs of one
// subject; the same number of cross pairs is sampled between distinct subjects.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "masc/manifest.hpp"

namespace masc {

// subject -> environment -> eligible asset ids (unordered).
using OridaInventory = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

OridaInventory inventory_from_json(const nlohmann::json& j);

struct OridaPhoto {
  std::string subject;
  std::string environment;
  std::string asset;

  auto operator<=>(const OridaPhoto&) const = default;
};

// Ordered: `ref` plays the reference role when scored.
struct OridaPair {
  OridaPhoto ref;
  OridaPhoto gen;

  auto operator<=>(const OridaPair&) const = default;
};

struct OridaPairPlan {
  std::vector<std::string> subjects;
  int environments_per_subject = 0;
  std::vector<OridaPair> within_pairs;
  std::vector<OridaPair> cross_pairs;
  std::uint64_t rng_seed = 0;
};

// Subjects and environments are taken in lexicographic order and each
// (subject, environment) uses its lexicographically first asset id. Cross
// pairs draw (subject_a, env, subject_b != subject_a, env') uniformly with
// SplitMix64(seed), skipping tuples already drawn, until they match the
// within count. Throws ArgumentError for < 2 subjects, < 2 environments,
// unequal environment counts, an environment without assets, or when too few
// distinct cross tuples exist.
OridaPairPlan build_orida_pairs(const OridaInventory& inventory, std::uint64_t seed);

nlohmann::json plan_to_json(const OridaPairPlan& plan);
OridaPairPlan plan_from_json(const nlohmann::json& j);

// Score-table key of a pair: method "within" or "cross", concept_id
// "<ref subject>/<ref environment>", prompt_idx = position in its pool, seed 0.
RecordKey within_pair_key(const OridaPairPlan& plan, std::size_t index);
RecordKey cross_pair_key(const OridaPairPlan& plan, std::size_t index);

// Manifest with one record per pair. Templates may use {subject},
// {environment} and {asset}; e.g. "feat/{subject}/{environment}/{asset}.mten".
struct PairAssetTemplates {
  std::string patch = "{subject}/{environment}/{asset}.mten";
  std::string mask = "{subject}/{environment}/{asset}.png";
};
nlohmann::json plan_manifest(const OridaPairPlan& plan, const PairAssetTemplates& templates);

}  // namespace masc
