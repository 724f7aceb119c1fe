// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/cp_scoring.hpp"

#include <algorithm>
#include <vector>

#include "masc/errors.hpp"

namespace masc {
namespace {

void check_dims(const UnitTokens& ref, const UnitTokens& gen) {
  if (ref.cols() != gen.cols())
    throw DimensionError("token dimension mismatch: ref D=" + std::to_string(ref.cols()) +
                         ", gen D=" + std::to_string(gen.cols()));
}

void check_mask(const PatchMask& mask, Eigen::Index n, const char* side) {
  if (static_cast<Eigen::Index>(mask.size()) != n)
    throw DimensionError(std::string(side) + " mask has " + std::to_string(mask.size()) +
                         " cells but grid has N=" + std::to_string(n));
}

}  // namespace

UnitTokens unit_tokens(const PatchGrid& grid) {
  UnitTokens out = grid.tokens().cast<double>();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (!(norm > kMinTokenNorm))
      throw DegenerateTokenError(static_cast<std::size_t>(i),
                                 "token row " + std::to_string(i) + " has near-zero norm");
    out.row(i) /= norm;
  }
  return out;
}

PatchGrid normalize_rows(const PatchGrid& grid) {
  TokenMatrix tokens = unit_tokens(grid).cast<float>();
  return PatchGrid(std::move(tokens), grid.grid_h(), grid.grid_w(), grid.source_image_id());
}

CpScore masked_maxcos(const UnitTokens& ref, const UnitTokens& gen, const PatchMask& ref_mask) {
  check_dims(ref, gen);
  check_mask(ref_mask, ref.rows(), "reference");
  const auto fg = foreground_indices(ref_mask);
  if (fg.empty()) throw EmptyForegroundError("reference mask has no foreground patch");

  UnitTokens fg_rows(static_cast<Eigen::Index>(fg.size()), ref.cols());
  for (std::size_t r = 0; r < fg.size(); ++r) fg_rows.row(r) = ref.row(static_cast<Eigen::Index>(fg[r]));

  const Eigen::MatrixXd sims = fg_rows * gen.transpose();
  double sum = 0.0;
  for (Eigen::Index r = 0; r < sims.rows(); ++r) sum += sims.row(r).maxCoeff();
  const double mean = std::clamp(sum / static_cast<double>(fg.size()), -1.0, 1.0);
  return CpScore{static_cast<float>(mean), fg.size()};
}

CpScore masked_maxcos(const PatchGrid& ref, const PatchGrid& gen, const PatchMask& ref_mask) {
  if (ref.dim() != gen.dim())
    throw DimensionError("token dimension mismatch: ref D=" + std::to_string(ref.dim()) +
                         ", gen D=" + std::to_string(gen.dim()));
  return masked_maxcos(unit_tokens(ref), unit_tokens(gen), ref_mask);
}

double mutual_nn_fg_recall(const UnitTokens& ref, const UnitTokens& gen, const PatchMask& ref_mask,
                           const PatchMask& gen_mask, MutualNnDenominator denominator) {
  check_dims(ref, gen);
  check_mask(ref_mask, ref.rows(), "reference");
  check_mask(gen_mask, gen.rows(), "generated");

  const Eigen::MatrixXd sims = ref * gen.transpose();
  const Eigen::Index nr = sims.rows();
  const Eigen::Index ng = sims.cols();

  // Strict '>' keeps the first (lowest) index on ties.
  std::vector<Eigen::Index> best_gen(nr, 0);
  std::vector<Eigen::Index> best_ref(ng, 0);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 1; j < ng; ++j) {
      if (sims(i, j) > sims(i, best_gen[i])) best_gen[i] = j;
    }
  }
  for (Eigen::Index j = 0; j < ng; ++j) {
    for (Eigen::Index i = 1; i < nr; ++i) {
      if (sims(i, j) > sims(best_ref[j], j)) best_ref[j] = i;
    }
  }

  std::size_t hits = 0;
  std::size_t counted = 0;
  for (Eigen::Index i = 0; i < nr; ++i) {
    const Eigen::Index j = best_gen[i];
    if (best_ref[j] != i) continue;
    const bool ref_fg = ref_mask[static_cast<std::size_t>(i)];
    const bool gen_fg = gen_mask[static_cast<std::size_t>(j)];
    if (denominator == MutualNnDenominator::AllMutual || ref_fg) ++counted;
    if (ref_fg && gen_fg) ++hits;
  }
  return counted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(counted);
}

double mutual_nn_fg_recall(const PatchGrid& ref, const PatchGrid& gen, const PatchMask& ref_mask,
                           const PatchMask& gen_mask, MutualNnDenominator denominator) {
  if (ref.dim() != gen.dim())
    throw DimensionError("token dimension mismatch: ref D=" + std::to_string(ref.dim()) +
                         ", gen D=" + std::to_string(gen.dim()));
  return mutual_nn_fg_recall(unit_tokens(ref), unit_tokens(gen), ref_mask, gen_mask, denominator);
}

}  // namespace masc
