// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Learned-query multi-head attention pooling head, evaluated on exported
// weights. Forward pass, with x_j the patch tokens and p the probe:
//
//   x_j      <- LayerNorm_pre(x_j)                      (only if exported)
//   q        =  Wq p + bq,  k_j = Wk x_j + bk,  v_j = Wv x_j + bv
//   a_hj     =  softmax_j(<q_h, k_hj> / sqrt(D / heads)), suppressed j get -inf
//   ctx_h    =  sum_j a_hj v_hj
//   attended =  Wo ctx + bo
//   pooled   =  attended + W2 act(W1 LayerNorm_post(attended) + b1) + b2
//
// Linear weights use the [out_features, in_features] convention.

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>

#include "masc/mask_ops.hpp"
#include "masc/patch_grid.hpp"

namespace masc {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { GeluTanh, GeluErf };

struct LayerNormParams {
  Eigen::VectorXf scale;
  Eigen::VectorXf offset;
};

struct PoolerHead {
  int num_heads = 1;
  double layer_norm_eps = 1e-6;
  Activation activation = Activation::GeluTanh;

  Eigen::VectorXf probe;
  RowMatrixF q_weight, k_weight, v_weight, out_weight;
  Eigen::VectorXf q_bias, k_bias, v_bias, out_bias;
  std::optional<LayerNormParams> pre_norm;
  LayerNormParams post_norm;
  RowMatrixF fc1_weight, fc2_weight;
  Eigen::VectorXf fc1_bias, fc2_bias;

  Eigen::Index dim() const noexcept { return probe.size(); }
  Eigen::Index hidden_dim() const noexcept { return fc1_bias.size(); }

  // Throws DimensionError on inconsistent shapes, DataError on non-finite values.
  void validate() const;

  // Directory layout documented in docs/formats.md (head.json + one
  // MASCTEN1 file per parameter).
  static PoolerHead load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

struct PoolTrace {
  Eigen::VectorXd context;   // concatenated per-head attention outputs, before Wo
  Eigen::VectorXd attended;  // after the output projection
  Eigen::VectorXd pooled;    // final embedding
  Eigen::MatrixXd weights;   // heads x N attention weights
};

// `suppress` marks positions excluded from attention (1 = hidden). Throws
// EmptyBackgroundError when every position is suppressed.
PoolTrace attention_pool_trace(const PatchGrid& grid, const PoolerHead& head,
                               const PatchMask* suppress = nullptr);

Eigen::VectorXf attention_pool(const PatchGrid& grid, const PoolerHead& head);
Eigen::VectorXf attention_pool(const PatchGrid& grid, const PoolerHead& head, const PatchMask& suppress);

}  // namespace masc
