// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <atomic>
#include <cmath>

#include "masc/subject_strip.hpp"
#include "masc/tensor_store.hpp"
#include "masc/text_embedding.hpp"

namespace masc::fixture {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  const auto stamp = std::to_string(rd()) + "_" + std::to_string(counter++);
  path_ = fs::temp_directory_path() / (tag + "_" + stamp);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

TokenMatrix random_tokens(Rng& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  TokenMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = normal(rng);
  return m;
}

PatchGrid random_grid(Rng& rng, int grid_h, int grid_w, Eigen::Index d) {
  return PatchGrid(random_tokens(rng, static_cast<Eigen::Index>(grid_h) * grid_w, d), grid_h, grid_w, "random");
}

PatchMask random_patch_mask(Rng& rng, int grid_h, int grid_w, double p, bool nonempty) {
  std::bernoulli_distribution coin(p);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(grid_h) * grid_w);
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  if (nonempty) bits[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(bits.size()) - 1))] = 1;
  return PatchMask(grid_h, grid_w, std::move(bits));
}

namespace {

RowMatrixF random_linear(Rng& rng, Eigen::Index out, Eigen::Index in) {
  RowMatrixF w = random_tokens(rng, out, in);
  return w / std::sqrt(static_cast<float>(in));
}

Eigen::VectorXf random_vector(Rng& rng, Eigen::Index n, float scale) {
  std::normal_distribution<float> normal(0.0f, scale);
  Eigen::VectorXf v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

LayerNormParams random_norm(Rng& rng, Eigen::Index d) {
  return {Eigen::VectorXf::Ones(d) + random_vector(rng, d, 0.1f), random_vector(rng, d, 0.1f)};
}

}  // namespace

PoolerHead random_head(Rng& rng, Eigen::Index d, int heads, Eigen::Index hidden, bool pre_norm) {
  PoolerHead h;
  h.num_heads = heads;
  h.probe = random_vector(rng, d, 1.0f);
  h.q_weight = random_linear(rng, d, d);
  h.k_weight = random_linear(rng, d, d);
  h.v_weight = random_linear(rng, d, d);
  h.out_weight = random_linear(rng, d, d);
  h.q_bias = random_vector(rng, d, 0.1f);
  h.k_bias = random_vector(rng, d, 0.1f);
  h.v_bias = random_vector(rng, d, 0.1f);
  h.out_bias = random_vector(rng, d, 0.1f);
  if (pre_norm) h.pre_norm = random_norm(rng, d);
  h.post_norm = random_norm(rng, d);
  h.fc1_weight = random_linear(rng, hidden, d);
  h.fc1_bias = random_vector(rng, hidden, 0.1f);
  h.fc2_weight = random_linear(rng, d, hidden);
  h.fc2_bias = random_vector(rng, d, 0.1f);
  h.validate();
  return h;
}

PixelMask mask_with_count(int height, int width, int count) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(height) * width, 0);
  for (int i = 0; i < count; ++i) bits[static_cast<std::size_t>(i)] = 1;
  return PixelMask(height, width, std::move(bits));
}

PixelMask rect_mask(int height, int width, int y0, int x0, int y1, int x1) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(height) * width, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) bits[static_cast<std::size_t>(y) * width + x] = 1;
  return PixelMask(height, width, std::move(bits));
}

json record_json(const std::string& method, const std::string& concept_id, int prompt_idx, int seed,
                 const std::string& ref_patch, const std::string& gen_patch, const std::string& ref_mask,
                 const std::string& gen_mask, const std::string& prompt, const std::string& subject) {
  return {{"key", {{"method", method}, {"concept_id", concept_id}, {"prompt_idx", prompt_idx}, {"seed", seed}}},
          {"ref_patch_path", ref_patch},
          {"gen_patch_path", gen_patch},
          {"ref_mask_path", ref_mask},
          {"gen_mask_path", gen_mask},
          {"prompt", prompt},
          {"subject_name", subject}};
}

namespace {

constexpr int kGrid = 4;
constexpr int kPixels = 16;
constexpr Eigen::Index kDim = 8;

// 8..10 pixels per side keeps both a fully covered and a fully clear patch
// centre on the 4x4 grid.
PixelMask random_blob(Rng& rng) {
  const int h = uniform_int(rng, 8, 10);
  const int w = uniform_int(rng, 8, 10);
  const int y = uniform_int(rng, 0, kPixels - h);
  const int x = uniform_int(rng, 0, kPixels - w);
  return rect_mask(kPixels, kPixels, y, x, y + h, x + w);
}

void save_text(Rng& rng, const fs::path& dir, const std::string& text) {
  const std::string hash = prompt_hash(text);
  if (fs::exists(text_embedding_path(dir, hash))) return;
  std::normal_distribution<float> normal(0.0f, 1.0f);
  TextEmbedding e;
  e.prompt_hash = hash;
  e.vector.resize(static_cast<std::size_t>(kDim));
  for (auto& v : e.vector) v = normal(rng);
  save_text_embedding(dir, e, text);
}

}  // namespace

FixtureDataset build_fixture_dataset(const fs::path& dir, std::uint64_t seed, int concepts, int prompts,
                                     int seeds) {
  static const std::vector<std::string> kSubjects = {"kitten", "piggy-bank", "red backpack", "dog",
                                                     "teapot", "robot toy"};
  static const std::vector<std::string> kTemplates = {"a photo of a {} on the beach", "the {} floating in space",
                                                      "A {} wearing a hat, watercolor", "{} next to another {}"};
  Rng rng(seed);
  FixtureDataset out;
  out.root = dir;
  out.manifest = dir / "manifest.json";
  out.pooler_dir = dir / "pooler";
  out.text_dir = dir / "text";
  fs::create_directories(dir / "refs");
  fs::create_directories(dir / "gen");
  fs::create_directories(out.text_dir);

  random_head(rng, kDim, 2, 16, true).save(out.pooler_dir);

  json records = json::array();
  bool planted_small = false;
  for (int c = 0; c < concepts; ++c) {
    const std::string cid = "c" + std::to_string(c);
    const std::string subject = kSubjects[static_cast<std::size_t>(c) % kSubjects.size()];
    PatchGrid ref = random_grid(rng, kGrid, kGrid, kDim);
    save_tensor(dir / "refs" / (cid + ".mten"), PatchGrid(ref.tokens(), kGrid, kGrid, cid).to_tensor());
    save_mask_png(dir / "refs" / (cid + ".png"), random_blob(rng));
    for (int p = 0; p < prompts; ++p) {
      std::string prompt = kTemplates[static_cast<std::size_t>(p) % kTemplates.size()];
      for (auto pos = prompt.find("{}"); pos != std::string::npos; pos = prompt.find("{}"))
        prompt.replace(pos, 2, subject);
      save_text(rng, out.text_dir, prompt);
      save_text(rng, out.text_dir, strip_subject(prompt, subject, StripMode::AllOccurrences));
      save_text(rng, out.text_dir, strip_subject(prompt, subject, StripMode::FirstOccurrence));
      for (int s = 0; s < seeds; ++s) {
        const std::string stem = cid + "_p" + std::to_string(p) + "_s" + std::to_string(s);
        // Generated grids lean towards the reference so CP scores spread out.
        TokenMatrix gen = random_tokens(rng, kGrid * kGrid, kDim);
        const float mix = static_cast<float>(uniform_real(rng, 0.0, 1.0));
        gen = mix * ref.tokens() + (1.0f - mix) * gen;
        save_tensor(dir / "gen" / (stem + ".mten"), PatchGrid(gen, kGrid, kGrid, stem).to_tensor());
        PixelMask gen_mask = random_blob(rng);
        if (!planted_small && c == concepts - 1 && p == 0) {
          gen_mask = mask_with_count(kPixels, kPixels, 5);
          planted_small = true;
          ++out.expected_drops;
        }
        save_mask_png(dir / "gen" / (stem + ".png"), gen_mask);
        json rec = record_json("method_a", cid, p, s, "refs/" + cid + ".mten", "gen/" + stem + ".mten",
                               "refs/" + cid + ".png", "gen/" + stem + ".png", prompt, subject);
        rec["ratings"] = {{"rater_1", uniform_int(rng, 1, 5)}, {"rater_2", uniform_int(rng, 1, 5)}};
        records.push_back(std::move(rec));
        ++out.record_count;
      }
    }
  }
  write_file_atomic(out.manifest, json{{"text_embedding_dir", "text"}, {"records", records}}.dump(1) + "\n");
  return out;
}

FilterFixture write_filter_fixture(const fs::path& dir) {
  constexpr int kSide = 20;
  fs::create_directories(dir / "masks");
  save_mask_png(dir / "masks" / "ok.png", rect_mask(kSide, kSide, 5, 5, 15, 15));
  save_mask_png(dir / "masks" / "g04.png", mask_with_count(kSide, kSide, 16));
  save_mask_png(dir / "masks" / "g05.png", mask_with_count(kSide, kSide, 20));
  save_mask_png(dir / "masks" / "r_small.png", mask_with_count(kSide, kSide, 10));
  save_mask_png(dir / "masks" / "empty.png", mask_with_count(kSide, kSide, 0));
  Rng rng(3);
  save_tensor(dir / "grid.mten", random_grid(rng, 4, 4, 4).to_tensor());

  struct Row {
    const char* concept_id;
    int prompt_idx;
    const char* ref_mask;
    const char* gen_mask;
  };
  const Row rows[] = {
      {"c1", 0, "ok", "ok"},          {"c1", 1, "ok", "g04"},          {"c1", 2, "ok", "g05"},
      {"c2", 0, "r_small", "ok"},     {"c2", 1, "ok", "ok"},           {"c2", 2, "ok", "g04"},
      {"style_a", 0, "ok", "ok"},     {"style_a", 1, "r_small", "g04"}, {"c3", 0, "ok", "ok"},
      {"c3", 1, "ok", "empty"},       {"c3", 2, "ok", "ok"},           {"c4", 0, "g05", "ok"},
  };
  json records = json::array();
  for (const auto& r : rows) {
    const std::string cid = r.concept_id;
    const std::string subject = cid == "style_a" ? "watercolor painting" : "toy " + cid;
    records.push_back(record_json("m", cid, r.prompt_idx, 0, "grid.mten", "grid.mten",
                                  std::string("masks/") + r.ref_mask + ".png",
                                  std::string("masks/") + r.gen_mask + ".png", "a " + subject + " in a park",
                                  subject));
  }
  FilterFixture out;
  out.manifest = dir / "manifest.json";
  write_file_atomic(out.manifest, json{{"records", records}}.dump(1) + "\n");
  out.policy.min_area_fraction = 0.05;
  out.policy.drop_all_prompts_on_ref_failure = true;
  out.policy.exclude_style_subjects = true;
  out.policy.style_subject_ids = {"style_a"};
  return out;
}

}  // namespace masc::fixture
