// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Random instances and on-disk datasets shared by the unit and acceptance tests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "masc/filtering.hpp"
#include "masc/mask_ops.hpp"
#include "masc/patch_grid.hpp"
#include "masc/pooler.hpp"

namespace masc::fixture {

using Rng = std::mt19937_64;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "masc");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

int uniform_int(Rng& rng, int lo, int hi);  // inclusive
double uniform_real(Rng& rng, double lo, double hi);

TokenMatrix random_tokens(Rng& rng, Eigen::Index n, Eigen::Index d);
PatchGrid random_grid(Rng& rng, int grid_h, int grid_w, Eigen::Index d);
PatchMask random_patch_mask(Rng& rng, int grid_h, int grid_w, double p, bool nonempty = true);
PoolerHead random_head(Rng& rng, Eigen::Index d, int heads, Eigen::Index hidden, bool pre_norm = false);

// Pixel mask whose first `count` pixels in raster order are foreground.
PixelMask mask_with_count(int height, int width, int count);
PixelMask rect_mask(int height, int width, int y0, int x0, int y1, int x1);

struct FixtureDataset {
  std::filesystem::path root;
  std::filesystem::path manifest;
  std::filesystem::path pooler_dir;
  std::filesystem::path text_dir;
  std::size_t record_count = 0;
  std::size_t expected_drops = 0;
};

// Small scoring dataset: grids, PNG masks, a random pooler head and text
// embeddings for both prompt variants of every record. Relative paths only.
FixtureDataset build_fixture_dataset(const std::filesystem::path& dir, std::uint64_t seed = 7,
                                     int concepts = 4, int prompts = 3, int seeds = 2);

// Twelve records on 20x20 masks (400 pixels, 5% = 20 pixels) covering every
// drop reason, including the precedence and concept-wide cases.
struct FilterFixture {
  std::filesystem::path manifest;
  FilterPolicy policy;  // 0.05, concept-wide, style exclusion of "style_a"
};
FilterFixture write_filter_fixture(const std::filesystem::path& dir);

nlohmann::json record_json(const std::string& method, const std::string& concept_id, int prompt_idx, int seed,
                           const std::string& ref_patch, const std::string& gen_patch,
                           const std::string& ref_mask, const std::string& gen_mask,
                           const std::string& prompt, const std::string& subject);

}  // namespace masc::fixture
