// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "masc/errors.hpp"
#include "masc/orida_pairs.hpp"
#include "masc/splitmix.hpp"

namespace masc {
namespace {

OridaInventory inventory(int subjects, int envs) {
  OridaInventory inv;
  for (int s = 0; s < subjects; ++s)
    for (int e = 0; e < envs; ++e) {
      const std::string sid = "s" + std::to_string(100 + s), eid = "e" + std::to_string(10 + e);
      inv[sid][eid] = {"z_late", "a_first_" + sid + eid, "m_mid"};
    }
  return inv;
}

TEST(SplitMix64, ReferenceVectors) {
  SplitMix64 a(0);
  EXPECT_EQ(a.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(a.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(a.next(), 0x06c45d188009454fULL);
  SplitMix64 b(1234567);
  EXPECT_EQ(b.next(), 0x599ed017fb08fc85ULL);
  EXPECT_EQ(b.next(), 0x2c73f08458540fa5ULL);
  EXPECT_EQ(b.next(), 0x883ebce5a3f27c77ULL);
}

TEST(SplitMix64, BelowStaysInRange) {
  SplitMix64 r(9);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(OridaPairs, TwoByTwo) {
  const OridaPairPlan p = build_orida_pairs(inventory(2, 2), 1);
  EXPECT_EQ(p.within_pairs.size(), 2u);
  EXPECT_EQ(p.cross_pairs.size(), 2u);
  for (const auto& c : p.cross_pairs) EXPECT_NE(c.ref.subject, c.gen.subject);
  EXPECT_EQ(p.within_pairs[0].ref.asset, "a_first_s100e10");
}

TEST(OridaPairs, FullProtocolCounts) {
  const OridaPairPlan p = build_orida_pairs(inventory(50, 10), 2025);
  EXPECT_EQ(p.within_pairs.size(), 2250u);
  EXPECT_EQ(p.cross_pairs.size(), 2250u);
  std::set<OridaPair> unique(p.cross_pairs.begin(), p.cross_pairs.end());
  EXPECT_EQ(unique.size(), 2250u);
  for (const auto& w : p.within_pairs) {
    EXPECT_EQ(w.ref.subject, w.gen.subject);
    EXPECT_LT(w.ref.environment, w.gen.environment);
  }
  for (const auto& c : p.cross_pairs) EXPECT_NE(c.ref.subject, c.gen.subject);
}

TEST(OridaPairs, DeterministicAndSeedSensitive) {
  const auto a = plan_to_json(build_orida_pairs(inventory(6, 4), 7)).dump();
  const auto b = plan_to_json(build_orida_pairs(inventory(6, 4), 7)).dump();
  const auto c = plan_to_json(build_orida_pairs(inventory(6, 4), 8)).dump();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(plan_to_json(plan_from_json(nlohmann::json::parse(a))).dump(), a);
}

TEST(OridaPairs, Errors) {
  EXPECT_THROW(build_orida_pairs(inventory(1, 4), 0), ArgumentError);
  EXPECT_THROW(build_orida_pairs(inventory(3, 1), 0), ArgumentError);
  OridaInventory uneven = inventory(3, 3);
  uneven["s100"].erase("e10");
  EXPECT_THROW(build_orida_pairs(uneven, 0), ArgumentError);
  OridaInventory empty = inventory(3, 3);
  empty["s101"]["e11"].clear();
  EXPECT_THROW(build_orida_pairs(empty, 0), ArgumentError);
  EXPECT_THROW(inventory_from_json(nlohmann::json{{"s", 3}}), SchemaError);
  EXPECT_THROW(plan_from_json(nlohmann::json::object()), SchemaError);
}

TEST(OridaPairs, KeysAndManifest) {
  const OridaPairPlan p = build_orida_pairs(inventory(3, 3), 4);
  const RecordKey k = within_pair_key(p, 1);
  EXPECT_EQ(k.method, "within");
  EXPECT_EQ(k.concept_id, p.within_pairs[1].ref.subject + "/" + p.within_pairs[1].ref.environment);
  EXPECT_EQ(k.prompt_idx, 1);
  EXPECT_EQ(cross_pair_key(p, 0).method, "cross");
  const auto m = plan_manifest(p, {"f/{subject}/{environment}/{asset}.mten", "k/{asset}.png"});
  ASSERT_EQ(m["records"].size(), 2 * p.within_pairs.size());
  const auto& r0 = m["records"][0];
  EXPECT_EQ(r0["ref_patch_path"], "f/s100/e10/a_first_s100e10.mten");
  EXPECT_EQ(r0["gen_mask_path"], "k/a_first_s100e11.png");
  EXPECT_EQ(inventory_from_json(nlohmann::json{{"subjects", {{"a", {{"e", {"x"}}}}}}}).at("a").at("e").at(0), "x");
}

}  // namespace
}  // namespace masc
