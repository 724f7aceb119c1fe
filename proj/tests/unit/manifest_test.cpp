// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "masc/errors.hpp"
#include "masc/manifest.hpp"
#include "masc/tensor_store.hpp"
#include "masc/text_embedding.hpp"

namespace masc {
namespace {

using nlohmann::json;

class ManifestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fixture::Rng rng(5);
    save_tensor(dir / "g.mten", fixture::random_grid(rng, 2, 2, 3).to_tensor());
    save_mask_png(dir / "m.png", PixelMask::filled(4, 4, true));
  }
  json rec(const std::string& cid, int p) const {
    return fixture::record_json("m", cid, p, 0, "g.mten", "g.mten", "m.png", "m.png", "a cat", "cat");
  }
  fixture::TempDir dir;
};

TEST_F(ManifestTest, ThreeRecordsInOrder) {
  const json doc = {{"records", {rec("b", 0), rec("a", 2), rec("a", 1)}}};
  write_file_atomic(dir / "manifest.json", doc.dump());
  const auto m = load_manifest(dir / "manifest.json");
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.records[0].key.concept_id, "b");
  EXPECT_EQ(m.records[1].key.prompt_idx, 2);
  EXPECT_EQ(m.records[2].key.prompt_idx, 1);
  EXPECT_EQ(m.records[0].ref_patch_path, dir.path() / "g.mten");
  EXPECT_FALSE(m.text_embedding_dir.has_value());
}

TEST_F(ManifestTest, DuplicateKeyRejected) {
  const json doc = {{"records", {rec("a", 0), rec("a", 0)}}};
  EXPECT_THROW(parse_manifest(doc.dump(), dir.path()), SchemaError);
}

TEST_F(ManifestTest, MissingAssetsReportedTogether) {
  json a = rec("a", 0), b = rec("b", 0);
  a["gen_mask_path"] = "absent1.png";
  b["ref_patch_path"] = "absent2.mten";
  try {
    parse_manifest(json{{"records", {a, b}}}.dump(), dir.path());
    FAIL() << "expected MissingAssetError";
  } catch (const MissingAssetError& e) {
    ASSERT_EQ(e.missing().size(), 2u);
    EXPECT_NE(e.missing()[0].find("absent1.png"), std::string::npos);
    EXPECT_NE(e.missing()[1].find("absent2.mten"), std::string::npos);
  }
}

TEST_F(ManifestTest, SchemaErrors) {
  EXPECT_THROW(parse_manifest("not json", dir.path()), SchemaError);
  EXPECT_THROW(parse_manifest("[]", dir.path()), SchemaError);
  json r = rec("a", 0);
  r.erase("prompt");
  EXPECT_THROW(parse_manifest(json{{"records", {r}}}.dump(), dir.path()), SchemaError);
  r = rec("a", 0);
  r["key"]["prompt_idx"] = "zero";
  EXPECT_THROW(parse_manifest(json{{"records", {r}}}.dump(), dir.path()), SchemaError);
  EXPECT_THROW(load_manifest(dir / "nope.json"), MissingAssetError);
}

TEST_F(ManifestTest, RatingsAndTextDir) {
  json r = rec("a", 0);
  r["ratings"] = {{"h1", 3}, {"h2", 4.5}};
  const auto m = parse_manifest(json{{"text_embedding_dir", "emb"}, {"records", {r}}}.dump(), dir.path());
  EXPECT_EQ(m.records[0].ratings.at("h2"), 4.5);
  EXPECT_EQ(*m.text_embedding_dir, dir.path() / "emb");
}

TEST(RecordKey, OrderingAndString) {
  const RecordKey a{"m", "c", 2, 0}, b{"m", "c", 10, 0};
  EXPECT_LT(a, b);
  EXPECT_EQ(a.str(), "m/c/2/0");
}

TEST(TextEmbedding, HashAndRoundTrip) {
  EXPECT_EQ(prompt_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(prompt_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fixture::TempDir dir;
  const std::string text = "a photo of a dog";
  TextEmbedding e{{1.0f, 2.0f, 3.0f}, prompt_hash(text)};
  save_text_embedding(dir.path(), e, text);
  EXPECT_TRUE(std::filesystem::exists(text_embedding_path(dir.path(), e.prompt_hash)));
  const auto back = load_text_embedding(dir.path(), e.prompt_hash);
  EXPECT_EQ(back.vector, e.vector);
  EXPECT_EQ(back.prompt_hash, e.prompt_hash);
  try {
    load_text_embedding(dir.path(), prompt_hash("other"));
    FAIL();
  } catch (const MissingAssetError& err) {
    EXPECT_NE(std::string(err.what()).find(prompt_hash("other")), std::string::npos);
  }
}

TEST(TextEmbedding, AcceptsRowVectorAndChecksHash) {
  fixture::TempDir dir;
  const std::string h = prompt_hash("x");
  save_tensor(text_embedding_path(dir.path(), h), Tensor{"x", {1, 2}, {0.5f, 0.25f}, {{"prompt_hash", h}}});
  EXPECT_EQ(load_text_embedding(dir.path(), h).vector.size(), 2u);
  const std::string g = prompt_hash("y");
  save_tensor(text_embedding_path(dir.path(), g), Tensor{"y", {2}, {0.5f, 0.25f}, {{"prompt_hash", h}}});
  EXPECT_THROW(load_text_embedding(dir.path(), g), SchemaError);
}

}  // namespace
}  // namespace masc
