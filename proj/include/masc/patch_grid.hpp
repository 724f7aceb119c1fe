// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

#include "masc/tensor_store.hpp"

namespace masc {

using TokenMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// N patch tokens of dimension D laid out on a grid_h x grid_w grid (row-major
// over the grid, so token index = y * grid_w + x).
class PatchGrid {
 public:
  PatchGrid(TokenMatrix tokens, int grid_h, int grid_w, std::string source_image_id = {});

  // Accepts shape [grid_h, grid_w, D], or [N, D] with integer meta fields
  // "grid_h" and "grid_w". The image id comes from meta "image_id" when
  // present, otherwise from the tensor name.
  static PatchGrid from_tensor(const Tensor& tensor);
  static PatchGrid load(const std::filesystem::path& path);

  // Shape [grid_h, grid_w, D]; meta carries image_id.
  Tensor to_tensor() const;

  const TokenMatrix& tokens() const noexcept { return tokens_; }
  int grid_h() const noexcept { return grid_h_; }
  int grid_w() const noexcept { return grid_w_; }
  Eigen::Index size() const noexcept { return tokens_.rows(); }
  Eigen::Index dim() const noexcept { return tokens_.cols(); }
  const std::string& source_image_id() const noexcept { return source_image_id_; }

 private:
  TokenMatrix tokens_;
  int grid_h_;
  int grid_w_;
  std::string source_image_id_;
};

}  // namespace masc
