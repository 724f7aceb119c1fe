// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "masc/errors.hpp"
#include "masc/filtering.hpp"

namespace masc {
namespace {

using Reasons = std::map<std::string, std::string>;  // "concept/prompt" -> reason or "kept"

Reasons outcome(const FilterResult& r) {
  Reasons out;
  for (const auto& rec : r.kept.records) out[rec.key.concept_id + "/" + std::to_string(rec.key.prompt_idx)] = "kept";
  for (const auto& d : r.drops)
    out[d.key.concept_id + "/" + std::to_string(d.key.prompt_idx)] = std::string(to_string(d.reason));
  return out;
}

class FilterFixtureTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fx = fixture::write_filter_fixture(dir.path());
    manifest = load_manifest(fx.manifest);
  }
  fixture::TempDir dir;
  fixture::FilterFixture fx;
  DatasetManifest manifest;
};

TEST_F(FilterFixtureTest, DefaultPolicy) {
  const Reasons expected = {
      {"c1/0", "kept"},           {"c1/1", "gen_mask_small"},     {"c1/2", "kept"},
      {"c2/0", "ref_mask_small"}, {"c2/1", "ref_mask_small"},     {"c2/2", "ref_mask_small"},
      {"style_a/0", "style_excluded"}, {"style_a/1", "style_excluded"}, {"c3/0", "kept"},
      {"c3/1", "gen_mask_small"}, {"c3/2", "kept"},               {"c4/0", "kept"},
  };
  const FilterResult r = apply_filter(manifest, fx.policy);
  EXPECT_EQ(outcome(r), expected);
  EXPECT_EQ(r.kept.records.size(), 5u);
  EXPECT_EQ(r.drops.size(), 7u);
  // Kept records preserve manifest order.
  EXPECT_EQ(r.kept.records.front().key.concept_id, "c1");
  EXPECT_EQ(r.kept.records.back().key.concept_id, "c4");
}

TEST_F(FilterFixtureTest, PerRecordReferenceAndNoStyle) {
  FilterPolicy p = fx.policy;
  p.drop_all_prompts_on_ref_failure = false;
  p.exclude_style_subjects = false;
  const Reasons r = outcome(apply_filter(manifest, p));
  EXPECT_EQ(r.at("c2/0"), "ref_mask_small");
  EXPECT_EQ(r.at("c2/1"), "kept");
  EXPECT_EQ(r.at("c2/2"), "gen_mask_small");
  EXPECT_EQ(r.at("style_a/0"), "kept");
  EXPECT_EQ(r.at("style_a/1"), "ref_mask_small");
}

TEST_F(FilterFixtureTest, Idempotent) {
  const FilterResult once = apply_filter(manifest, fx.policy);
  const FilterResult twice = apply_filter(once.kept, fx.policy);
  EXPECT_TRUE(twice.drops.empty());
  ASSERT_EQ(twice.kept.records.size(), once.kept.records.size());
  for (std::size_t i = 0; i < once.kept.records.size(); ++i)
    EXPECT_EQ(twice.kept.records[i].key, once.kept.records[i].key);
}

TEST_F(FilterFixtureTest, LenientThresholdKeepsAll) {
  FilterPolicy p;
  p.min_area_fraction = 1e-9;
  const FilterResult r = apply_filter(manifest, p);
  EXPECT_EQ(r.drops.size(), 1u);  // the empty generated mask
  EXPECT_EQ(r.drops[0].key.concept_id, "c3");
}

TEST_F(FilterFixtureTest, DropReport) {
  const std::string jsonl = drop_report_jsonl(apply_filter(manifest, fx.policy).drops);
  const auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  EXPECT_EQ(first["reason"], "gen_mask_small");
  EXPECT_EQ(first["key"]["concept_id"], "c1");
  EXPECT_EQ(first["key"]["prompt_idx"], 1);
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 7);
}

TEST_F(FilterFixtureTest, MissingMaskAtFilterTime) {
  std::filesystem::remove(dir / "masks/g04.png");
  EXPECT_THROW(apply_filter(manifest, fx.policy), MissingAssetError);
}

TEST(FilterPolicy, JsonAndValidation) {
  FilterPolicy p;
  p.style_subject_ids = {"s1", "s2"};
  p.exclude_style_subjects = true;
  const FilterPolicy back = FilterPolicy::from_json(p.to_json());
  EXPECT_EQ(back.style_subject_ids, p.style_subject_ids);
  EXPECT_TRUE(back.exclude_style_subjects);
  EXPECT_THROW(FilterPolicy::from_json({{"min_area_fraction", 0}}), ArgumentError);
  EXPECT_THROW(FilterPolicy::from_json({{"min_area_fraction", 1.5}}), ArgumentError);
  EXPECT_THROW(FilterPolicy::from_json({{"min_area_fraction", "x"}}), SchemaError);
  EXPECT_THROW(FilterPolicy::from_json(nlohmann::json::array()), SchemaError);
}

}  // namespace
}  // namespace masc
