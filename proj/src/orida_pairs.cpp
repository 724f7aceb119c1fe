// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/orida_pairs.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "masc/errors.hpp"
#include "masc/splitmix.hpp"

namespace masc {
namespace {

nlohmann::json photo_json(const OridaPhoto& p) {
  return {{"subject", p.subject}, {"environment", p.environment}, {"asset", p.asset}};
}

OridaPhoto photo_from(const nlohmann::json& j) {
  return OridaPhoto{j.at("subject").get<std::string>(), j.at("environment").get<std::string>(),
                    j.at("asset").get<std::string>()};
}

std::string expand(std::string pattern, const OridaPhoto& p) {
  const std::pair<std::string, const std::string*> fields[] = {
      {"{subject}", &p.subject}, {"{environment}", &p.environment}, {"{asset}", &p.asset}};
  for (const auto& [token, value] : fields) {
    for (auto pos = pattern.find(token); pos != std::string::npos; pos = pattern.find(token, pos + value->size()))
      pattern.replace(pos, token.size(), *value);
  }
  return pattern;
}

RecordKey pair_key(const char* pool, const OridaPair& pair, std::size_t index) {
  return RecordKey{pool, pair.ref.subject + "/" + pair.ref.environment, static_cast<std::int64_t>(index), 0};
}

}  // namespace

OridaInventory inventory_from_json(const nlohmann::json& j) {
  const auto& subjects = j.contains("subjects") ? j.at("subjects") : j;
  try {
    return subjects.get<OridaInventory>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("inventory must map subject -> environment -> [asset ids]: ") + e.what());
  }
}

OridaPairPlan build_orida_pairs(const OridaInventory& inventory, std::uint64_t seed) {
  if (inventory.size() < 2) throw ArgumentError("pair protocol needs at least two subjects");

  // photos[s][e]: first asset of environment e of subject s, both sorted.
  std::vector<std::vector<OridaPhoto>> photos;
  OridaPairPlan plan;
  plan.rng_seed = seed;
  for (const auto& [subject, envs] : inventory) {
    if (envs.size() < 2) throw ArgumentError("subject '" + subject + "' has fewer than two environments");
    if (!photos.empty() && envs.size() != photos.front().size())
      throw ArgumentError("subject '" + subject + "' has " + std::to_string(envs.size()) +
                          " environments; every subject needs " + std::to_string(photos.front().size()));
    std::vector<OridaPhoto> row;
    for (const auto& [env, assets] : envs) {
      if (assets.empty()) throw ArgumentError("subject '" + subject + "' environment '" + env + "' has no asset");
      row.push_back(OridaPhoto{subject, env, *std::min_element(assets.begin(), assets.end())});
    }
    photos.push_back(std::move(row));
    plan.subjects.push_back(subject);
  }
  const std::size_t n_subjects = photos.size();
  const std::size_t n_envs = photos.front().size();
  plan.environments_per_subject = static_cast<int>(n_envs);

  for (const auto& row : photos) {
    for (std::size_t a = 0; a < n_envs; ++a) {
      for (std::size_t b = a + 1; b < n_envs; ++b) plan.within_pairs.push_back({row[a], row[b]});
    }
  }

  const std::size_t wanted = plan.within_pairs.size();
  const std::size_t available = n_subjects * (n_subjects - 1) * n_envs * n_envs;
  if (wanted > available)
    throw ArgumentError("only " + std::to_string(available) + " distinct cross tuples for " +
                        std::to_string(wanted) + " within pairs");

  SplitMix64 rng(seed);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> drawn;
  while (plan.cross_pairs.size() < wanted) {
    const std::size_t sa = rng.below(n_subjects);
    const std::size_t ea = rng.below(n_envs);
    std::size_t sb = rng.below(n_subjects - 1);
    if (sb >= sa) ++sb;
    const std::size_t eb = rng.below(n_envs);
    if (!drawn.emplace(sa, ea, sb, eb).second) continue;
    plan.cross_pairs.push_back({photos[sa][ea], photos[sb][eb]});
  }
  return plan;
}

nlohmann::json plan_to_json(const OridaPairPlan& plan) {
  nlohmann::json within = nlohmann::json::array();
  for (const auto& p : plan.within_pairs) within.push_back({{"ref", photo_json(p.ref)}, {"gen", photo_json(p.gen)}});
  nlohmann::json cross = nlohmann::json::array();
  for (const auto& p : plan.cross_pairs) cross.push_back({{"ref", photo_json(p.ref)}, {"gen", photo_json(p.gen)}});
  return {{"generator", "splitmix64"},
          {"rng_seed", plan.rng_seed},
          {"subjects", plan.subjects},
          {"environments_per_subject", plan.environments_per_subject},
          {"within_pairs", within},
          {"cross_pairs", cross}};
}

OridaPairPlan plan_from_json(const nlohmann::json& j) {
  OridaPairPlan plan;
  try {
    plan.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    plan.subjects = j.at("subjects").get<std::vector<std::string>>();
    plan.environments_per_subject = j.at("environments_per_subject").get<int>();
    for (const auto& p : j.at("within_pairs")) plan.within_pairs.push_back({photo_from(p.at("ref")), photo_from(p.at("gen"))});
    for (const auto& p : j.at("cross_pairs")) plan.cross_pairs.push_back({photo_from(p.at("ref")), photo_from(p.at("gen"))});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid pair plan: ") + e.what());
  }
  return plan;
}

RecordKey within_pair_key(const OridaPairPlan& plan, std::size_t index) {
  return pair_key("within", plan.within_pairs.at(index), index);
}

RecordKey cross_pair_key(const OridaPairPlan& plan, std::size_t index) {
  return pair_key("cross", plan.cross_pairs.at(index), index);
}

nlohmann::json plan_manifest(const OridaPairPlan& plan, const PairAssetTemplates& templates) {
  nlohmann::json records = nlohmann::json::array();
  auto add = [&](const RecordKey& key, const OridaPair& pair) {
    records.push_back({
        {"key", {{"method", key.method}, {"concept_id", key.concept_id}, {"prompt_idx", key.prompt_idx}, {"seed", key.seed}}},
        {"ref_patch_path", expand(templates.patch, pair.ref)},
        {"gen_patch_path", expand(templates.patch, pair.gen)},
        {"ref_mask_path", expand(templates.mask, pair.ref)},
        {"gen_mask_path", expand(templates.mask, pair.gen)},
        {"prompt", ""},
        {"subject_name", pair.ref.subject},
    });
  };
  for (std::size_t i = 0; i < plan.within_pairs.size(); ++i) add(within_pair_key(plan, i), plan.within_pairs[i]);
  for (std::size_t i = 0; i < plan.cross_pairs.size(); ++i) add(cross_pair_key(plan, i), plan.cross_pairs[i]);
  return {{"records", records}};
}

}  // namespace masc
