// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/errors.hpp"

#include <utility>

namespace masc {
namespace {

std::string describe_missing(const std::vector<std::string>& missing) {
  std::string out = "missing asset";
  if (missing.size() != 1) out += "s (" + std::to_string(missing.size()) + ")";
  out += ":";
  for (const auto& path : missing) out += "\n  " + path;
  return out;
}

}  // namespace

MissingAssetError::MissingAssetError(std::vector<std::string> missing)
    : DataFailure(describe_missing(missing)), missing_(std::move(missing)) {}

MissingAssetError::MissingAssetError(std::vector<std::string> missing, const std::string& what)
    : DataFailure(what), missing_(std::move(missing)) {}

}  // namespace masc
