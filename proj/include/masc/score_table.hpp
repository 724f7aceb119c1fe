// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// Keyed score / rating tables stored as CSV:
//   method,concept_id,prompt_idx,seed,<value column>...
// UTF-8, '.' decimal separator, RFC 4180 quoting, empty cell = missing value.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "masc/manifest.hpp"

namespace masc {

struct ScoreRow {
  RecordKey key;
  std::vector<std::optional<double>> values;
};

struct ScoreTable {
  std::vector<std::string> columns;
  std::vector<ScoreRow> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  void sort_by_key();
};

// Values print with 9 significant digits, which round-trips binary32 scores.
std::string to_csv(const ScoreTable& table);
ScoreTable parse_score_csv(std::string_view text);

ScoreTable load_score_csv(const std::filesystem::path& path);
void save_score_csv(const std::filesystem::path& path, const ScoreTable& table);

std::string format_value(double v);

// Minimal RFC 4180 helpers shared with the other line-oriented writers.
std::string csv_escape(std::string_view field);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace masc
