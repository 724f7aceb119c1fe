// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "masc/errors.hpp"
#include "masc/pooler.hpp"
#include "masc/tensor_store.hpp"
#include "oracles.hpp"

namespace masc {
namespace {

using fixture::Rng;

std::vector<bool> as_flags(const PatchMask& m) {
  std::vector<bool> out;
  for (std::size_t i = 0; i < m.size(); ++i) out.push_back(m[i]);
  return out;
}

TEST(Pooler, MatchesDirectForm) {
  Rng rng(31);
  for (int t = 0; t < 60; ++t) {
    const int heads = std::array{1, 2, 4}[static_cast<std::size_t>(t % 3)];
    const Eigen::Index d = heads * fixture::uniform_int(rng, 1, 4);
    PoolerHead head = fixture::random_head(rng, d, heads, fixture::uniform_int(rng, 1, 12), t % 2 == 0);
    if (t % 5 == 0) head.activation = Activation::GeluErf;
    const PatchGrid g = fixture::random_grid(rng, fixture::uniform_int(rng, 1, 5), fixture::uniform_int(rng, 1, 5), d);
    PatchMask sup = fixture::random_patch_mask(rng, g.grid_h(), g.grid_w(), 0.4, false);
    if (sup.count() == sup.size()) sup = PatchMask::filled(g.grid_h(), g.grid_w(), false);
    const Eigen::VectorXd expect = oracle::pool(g.tokens(), head, as_flags(sup));
    const Eigen::VectorXd got = attention_pool_trace(g, head, &sup).pooled;
    ASSERT_EQ(got.size(), expect.size());
    for (Eigen::Index i = 0; i < d; ++i) EXPECT_NEAR(got(i), expect(i), 1e-10 * (1.0 + std::abs(expect(i))));
  }
}

TEST(Pooler, ZeroSuppressionEqualsNone) {
  Rng rng(32);
  const PoolerHead head = fixture::random_head(rng, 8, 2, 16);
  const PatchGrid g = fixture::random_grid(rng, 4, 4, 8);
  const Eigen::VectorXf a = attention_pool(g, head);
  const Eigen::VectorXf b = attention_pool(g, head, PatchMask::filled(4, 4, false));
  EXPECT_EQ(a, b);
}

TEST(Pooler, SuppressedValuesAreIgnored) {
  Rng rng(33);
  for (int t = 0; t < 20; ++t) {
    const PoolerHead head = fixture::random_head(rng, 8, 4, 8, true);
    const PatchGrid g = fixture::random_grid(rng, 3, 3, 8);
    const PatchMask sup = fixture::random_patch_mask(rng, 3, 3, 0.5).inverted();
    if (sup.count() == sup.size()) continue;
    TokenMatrix other = g.tokens();
    const TokenMatrix noise = fixture::random_tokens(rng, 9, 8) * 100.0f;
    for (int j = 0; j < 9; ++j)
      if (sup[static_cast<std::size_t>(j)]) other.row(j) = noise.row(j);
    EXPECT_EQ(attention_pool(g, head, sup), attention_pool(PatchGrid(other, 3, 3), head, sup));
  }
}

TEST(Pooler, SingleVisibleTokenGivesItsValue) {
  Rng rng(34);
  const PoolerHead head = fixture::random_head(rng, 6, 3, 5);
  const PatchGrid g = fixture::random_grid(rng, 2, 3, 6);
  std::vector<std::uint8_t> bits(6, 1);
  bits[4] = 0;
  const PatchMask sup(2, 3, bits);
  const PoolTrace trace = attention_pool_trace(g, head, &sup);
  const Eigen::VectorXd x = g.tokens().row(4).transpose().cast<double>();
  const Eigen::VectorXd v = head.v_weight.cast<double>() * x + head.v_bias.cast<double>();
  EXPECT_LT((trace.context - v).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index h = 0; h < 3; ++h) EXPECT_DOUBLE_EQ(trace.weights(h, 4), 1.0);
}

TEST(Pooler, PermutationEquivariance) {
  Rng rng(35);
  const PoolerHead head = fixture::random_head(rng, 8, 2, 8);
  const PatchGrid g = fixture::random_grid(rng, 4, 4, 8);
  const PatchMask sup = fixture::random_patch_mask(rng, 4, 4, 0.3, false);
  if (sup.count() == sup.size()) GTEST_SKIP();
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  TokenMatrix p(16, 8);
  std::vector<std::uint8_t> pbits(16);
  for (int i = 0; i < 16; ++i) {
    p.row(i) = g.tokens().row(perm[static_cast<std::size_t>(i)]);
    pbits[static_cast<std::size_t>(i)] = sup.bits()[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  const Eigen::VectorXf a = attention_pool(g, head, sup);
  const Eigen::VectorXf b = attention_pool(PatchGrid(p, 4, 4), head, PatchMask(4, 4, pbits));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-5f);
}

TEST(Pooler, Errors) {
  Rng rng(36);
  const PoolerHead head = fixture::random_head(rng, 4, 2, 4);
  const PatchGrid g = fixture::random_grid(rng, 2, 2, 4);
  EXPECT_THROW(attention_pool(g, head, PatchMask::filled(2, 2, true)), EmptyBackgroundError);
  EXPECT_THROW(attention_pool(g, head, PatchMask::filled(1, 2, false)), DimensionError);
  EXPECT_THROW(attention_pool(fixture::random_grid(rng, 2, 2, 5), head), DimensionError);
  PoolerHead bad = head;
  bad.num_heads = 3;
  EXPECT_THROW(bad.validate(), DimensionError);
  bad = head;
  bad.fc2_bias.resize(3);
  EXPECT_THROW(bad.validate(), DimensionError);
}

TEST(Pooler, SaveLoadRoundTrip) {
  fixture::TempDir dir;
  Rng rng(37);
  PoolerHead head = fixture::random_head(rng, 8, 2, 16, true);
  head.activation = Activation::GeluErf;
  head.layer_norm_eps = 1e-5;
  head.save(dir.path());
  const PoolerHead back = PoolerHead::load(dir.path());
  EXPECT_EQ(back.num_heads, 2);
  EXPECT_EQ(back.layer_norm_eps, 1e-5);
  EXPECT_EQ(back.activation, Activation::GeluErf);
  ASSERT_TRUE(back.pre_norm.has_value());
  const PatchGrid g = fixture::random_grid(rng, 3, 3, 8);
  EXPECT_EQ(attention_pool(g, head), attention_pool(g, back));
}

TEST(Pooler, PackedInProjection) {
  fixture::TempDir dir;
  Rng rng(38);
  const PoolerHead head = fixture::random_head(rng, 4, 2, 6);
  head.save(dir.path());
  RowMatrixF packed(12, 4);
  packed << head.q_weight, head.k_weight, head.v_weight;
  Eigen::VectorXf bias(12);
  bias << head.q_bias, head.k_bias, head.v_bias;
  for (const char* n : {"q_weight", "k_weight", "v_weight", "q_bias", "k_bias", "v_bias"})
    std::filesystem::remove(dir / (std::string(n) + ".mten"));
  save_tensor(dir / "in_proj_weight.mten", Tensor{"w", {12, 4}, {packed.data(), packed.data() + 48}, nlohmann::json::object()});
  save_tensor(dir / "in_proj_bias.mten", Tensor{"b", {12}, {bias.data(), bias.data() + 12}, nlohmann::json::object()});
  const PoolerHead back = PoolerHead::load(dir.path());
  const PatchGrid g = fixture::random_grid(rng, 2, 2, 4);
  EXPECT_EQ(attention_pool(g, head), attention_pool(g, back));
}

TEST(Pooler, BadConfig) {
  fixture::TempDir dir;
  Rng rng(39);
  fixture::random_head(rng, 4, 2, 6).save(dir.path());
  write_file_atomic(dir / "head.json", std::string(R"({"num_heads":2,"activation":"relu"})"));
  EXPECT_THROW(PoolerHead::load(dir.path()), SchemaError);
  write_file_atomic(dir / "head.json", std::string("{"));
  EXPECT_THROW(PoolerHead::load(dir.path()), SchemaError);
  std::filesystem::remove(dir / "head.json");
  EXPECT_THROW(PoolerHead::load(dir.path()), MissingAssetError);
}

}  // namespace
}  // namespace masc
