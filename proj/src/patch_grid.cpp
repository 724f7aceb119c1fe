// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/patch_grid.hpp"

#include <utility>

#include "masc/errors.hpp"

namespace masc {

PatchGrid::PatchGrid(TokenMatrix tokens, int grid_h, int grid_w, std::string source_image_id)
    : tokens_(std::move(tokens)),
      grid_h_(grid_h),
      grid_w_(grid_w),
      source_image_id_(std::move(source_image_id)) {
  if (tokens_.rows() < 1 || tokens_.cols() < 1)
    throw SchemaError("patch grid needs N >= 1 and D >= 1");
  if (grid_h_ < 1 || grid_w_ < 1 ||
      static_cast<Eigen::Index>(grid_h_) * grid_w_ != tokens_.rows())
    throw SchemaError("grid " + std::to_string(grid_h_) + "x" + std::to_string(grid_w_) +
                      " inconsistent with N=" + std::to_string(tokens_.rows()));
  if (!tokens_.allFinite()) throw DataError("patch grid contains non-finite values");
}

PatchGrid PatchGrid::from_tensor(const Tensor& tensor) {
  std::int64_t gh = 0, gw = 0, d = 0;
  if (tensor.shape.size() == 3) {
    gh = tensor.shape[0];
    gw = tensor.shape[1];
    d = tensor.shape[2];
  } else if (tensor.shape.size() == 2) {
    const auto& m = tensor.meta;
    if (!m.contains("grid_h") || !m.contains("grid_w") || !m["grid_h"].is_number_integer() ||
        !m["grid_w"].is_number_integer())
      throw SchemaError("rank-2 patch tensor '" + tensor.name + "' needs integer meta grid_h/grid_w");
    gh = m["grid_h"].get<std::int64_t>();
    gw = m["grid_w"].get<std::int64_t>();
    d = tensor.shape[1];
    if (gh * gw != tensor.shape[0])
      throw SchemaError("meta grid " + std::to_string(gh) + "x" + std::to_string(gw) +
                        " inconsistent with N=" + std::to_string(tensor.shape[0]));
  } else {
    throw SchemaError("patch tensor '" + tensor.name + "' must have rank 2 or 3");
  }
  const Eigen::Index n = gh * gw;
  TokenMatrix tokens = Eigen::Map<const TokenMatrix>(tensor.data.data(), n, d);
  std::string id = tensor.name;
  if (tensor.meta.contains("image_id") && tensor.meta["image_id"].is_string())
    id = tensor.meta["image_id"].get<std::string>();
  return PatchGrid(std::move(tokens), static_cast<int>(gh), static_cast<int>(gw), std::move(id));
}

PatchGrid PatchGrid::load(const std::filesystem::path& path) {
  try {
    return from_tensor(load_tensor(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Tensor PatchGrid::to_tensor() const {
  Tensor t;
  t.name = source_image_id_.empty() ? "patches" : source_image_id_;
  t.shape = {grid_h_, grid_w_, tokens_.cols()};
  t.data.assign(tokens_.data(), tokens_.data() + tokens_.size());
  t.meta = {{"image_id", source_image_id_}, {"grid_h", grid_h_}, {"grid_w", grid_w_}};
  return t;
}

}  // namespace masc
