// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Prompt Following: pool the generated image with part of the grid hidden,
// then take the cosine against a (possibly subject-stripped) text embedding.

#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "masc/mask_ops.hpp"
#include "masc/patch_grid.hpp"
#include "masc/pooler.hpp"
#include "masc/text_embedding.hpp"

namespace masc {

enum class PoolMode {
  Background,  // foreground patches suppressed
  Full,        // nothing suppressed
  Foreground,  // background patches suppressed
};

std::string_view to_string(PoolMode mode);
PoolMode parse_pool_mode(std::string_view text);

struct PfScore {
  float value = 0.0f;
  PoolMode pool_mode = PoolMode::Background;
  bool stripped = false;
};

// Suppression mask for `mode` given the generated foreground mask; empty for Full.
// Throws EmptyBackgroundError / EmptyForegroundError when nothing stays visible.
std::optional<PatchMask> suppression_for(PoolMode mode, const PatchMask& gen_mask);

// Unit-normalises both vectors. Throws DimensionError on a length mismatch and
// DataError on a zero vector.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Pooler output for the generated grid under `mode`, before normalisation.
Eigen::VectorXd pooled_embedding(const PatchGrid& gen, const PatchMask& gen_mask, const PoolerHead& head,
                                 PoolMode mode);

PfScore pf_score(const PatchGrid& gen, const PatchMask& gen_mask, const PoolerHead& head,
                 const TextEmbedding& text, PoolMode mode, bool stripped = true);

// Table layout of the pooling x prompt ablation. Foreground x stripped is
// structurally invalid and is always absent.
struct PfAblationGrid {
  static constexpr std::array<PoolMode, 3> kModes = {PoolMode::Background, PoolMode::Full,
                                                     PoolMode::Foreground};
  // cells[mode][0] = full prompt, cells[mode][1] = stripped prompt.
  std::array<std::array<std::optional<float>, 2>, 3> cells;

  const std::optional<float>& at(PoolMode mode, bool stripped) const;
  static bool valid_cell(PoolMode mode, bool stripped) { return !(mode == PoolMode::Foreground && stripped); }
};

PfAblationGrid pf_ablation_grid(const PatchGrid& gen, const PatchMask& gen_mask, const PoolerHead& head,
                                const TextEmbedding& text_full, const TextEmbedding& text_stripped);

}  // namespace masc
