// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/pf_scoring.hpp"

#include <algorithm>
#include <string>

#include "masc/errors.hpp"

namespace masc {
namespace {

std::size_t mode_index(PoolMode mode) {
  switch (mode) {
    case PoolMode::Background: return 0;
    case PoolMode::Full: return 1;
    case PoolMode::Foreground: return 2;
  }
  return 0;
}

}  // namespace

std::string_view to_string(PoolMode mode) {
  switch (mode) {
    case PoolMode::Background: return "background";
    case PoolMode::Full: return "full";
    case PoolMode::Foreground: return "foreground";
  }
  return "background";
}

PoolMode parse_pool_mode(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "background" || s == "bg") return PoolMode::Background;
  if (s == "full") return PoolMode::Full;
  if (s == "foreground" || s == "fg") return PoolMode::Foreground;
  throw ArgumentError("unknown pool mode '" + std::string(text) + "'");
}

std::optional<PatchMask> suppression_for(PoolMode mode, const PatchMask& gen_mask) {
  switch (mode) {
    case PoolMode::Full:
      return std::nullopt;
    case PoolMode::Background:
      if (gen_mask.count() == gen_mask.size())
        throw EmptyBackgroundError("generated mask covers every patch; no background to pool");
      return gen_mask;
    case PoolMode::Foreground:
      if (gen_mask.count() == 0)
        throw EmptyForegroundError("generated mask has no foreground patch to pool");
      return gen_mask.inverted();
  }
  return std::nullopt;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw DimensionError("embedding length mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DataError("cannot normalise a zero embedding");
  return std::clamp((a / na).dot(b / nb), -1.0, 1.0);
}

Eigen::VectorXd pooled_embedding(const PatchGrid& gen, const PatchMask& gen_mask, const PoolerHead& head,
                           PoolMode mode) {
  if (static_cast<Eigen::Index>(gen_mask.size()) != gen.size())
    throw DimensionError("generated mask does not match the patch grid");
  const auto suppress = suppression_for(mode, gen_mask);
  return attention_pool_trace(gen, head, suppress ? &*suppress : nullptr).pooled;
}

static Eigen::VectorXd text_vector(const TextEmbedding& text, const PoolerHead& head) {
  if (static_cast<Eigen::Index>(text.vector.size()) != head.dim())
    throw DimensionError("text embedding " + text.prompt_hash + " has D=" + std::to_string(text.vector.size()) +
                         " but the pooler outputs D=" + std::to_string(head.dim()));
  return Eigen::Map<const Eigen::VectorXf>(text.vector.data(), static_cast<Eigen::Index>(text.vector.size()))
      .cast<double>();
}

PfScore pf_score(const PatchGrid& gen, const PatchMask& gen_mask, const PoolerHead& head,
                 const TextEmbedding& text, PoolMode mode, bool stripped) {
  const Eigen::VectorXd t = text_vector(text, head);
  return PfScore{static_cast<float>(cosine(pooled_embedding(gen, gen_mask, head, mode), t)), mode, stripped};
}

const std::optional<float>& PfAblationGrid::at(PoolMode mode, bool stripped) const {
  return cells[mode_index(mode)][stripped ? 1 : 0];
}

PfAblationGrid pf_ablation_grid(const PatchGrid& gen, const PatchMask& gen_mask, const PoolerHead& head,
                                const TextEmbedding& text_full, const TextEmbedding& text_stripped) {
  const Eigen::VectorXd full = text_vector(text_full, head);
  const Eigen::VectorXd stripped = text_vector(text_stripped, head);
  PfAblationGrid grid;
  for (PoolMode mode : PfAblationGrid::kModes) {
    const Eigen::VectorXd pooled = pooled_embedding(gen, gen_mask, head, mode);
    auto& row = grid.cells[mode_index(mode)];
    row[0] = static_cast<float>(cosine(pooled, full));
    if (PfAblationGrid::valid_cell(mode, true)) row[1] = static_cast<float>(cosine(pooled, stripped));
  }
  return grid;
}

}  // namespace masc
