// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Concept Preservation. masked_maxcos takes every foreground reference patch,
// finds its best cosine match anywhere in the generated grid, and averages
// those maxima over the reference foreground.

#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "masc/mask_ops.hpp"
#include "masc/patch_grid.hpp"

namespace masc {

// Rows of a patch grid scaled to unit norm, held in double precision.
using UnitTokens = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kMinTokenNorm = 1e-12;

struct CpScore {
  float value = 0.0f;
  std::size_t fg_count = 0;
};

// Throws DegenerateTokenError naming the first row whose norm is <= 1e-12.
PatchGrid normalize_rows(const PatchGrid& grid);
UnitTokens unit_tokens(const PatchGrid& grid);

CpScore masked_maxcos(const PatchGrid& ref, const PatchGrid& gen, const PatchMask& ref_mask);
CpScore masked_maxcos(const UnitTokens& ref, const UnitTokens& gen, const PatchMask& ref_mask);

enum class MutualNnDenominator {
  ForegroundReference,  // mutual pairs whose reference side is foreground
  AllMutual,            // every mutual pair
};

// Mutual nearest neighbours under cosine, ties broken towards the lowest
// index. Returns the share of counted pairs that land foreground-to-foreground,
// or 0 when nothing is counted.
double mutual_nn_fg_recall(const PatchGrid& ref, const PatchGrid& gen, const PatchMask& ref_mask,
                           const PatchMask& gen_mask,
                           MutualNnDenominator denominator = MutualNnDenominator::ForegroundReference);
double mutual_nn_fg_recall(const UnitTokens& ref, const UnitTokens& gen, const PatchMask& ref_mask,
                           const PatchMask& gen_mask,
                           MutualNnDenominator denominator = MutualNnDenominator::ForegroundReference);

}  // namespace masc
