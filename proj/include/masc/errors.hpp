// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace masc {

// Root of every error raised by the engine. The CLI maps anything derived
// from DataFailure to exit code 2 and ArgumentError to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataFailure : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class FormatError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class DataError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class DimensionError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class DegenerateDataError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class EmptyForegroundError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class EmptyBackgroundError : public DataFailure {
 public:
  using DataFailure::DataFailure;
};

class DegenerateTokenError : public DataFailure {
 public:
  DegenerateTokenError(std::size_t row, const std::string& what)
      : DataFailure(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Carries every missing path, not just the first one encountered.
class MissingAssetError : public DataFailure {
 public:
  explicit MissingAssetError(std::vector<std::string> missing);
  MissingAssetError(std::vector<std::string> missing, const std::string& what);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

}  // namespace masc
