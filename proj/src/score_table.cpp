// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/score_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "masc/errors.hpp"
#include "masc/tensor_store.hpp"

namespace masc {
namespace {

constexpr std::string_view kKeyColumns[] = {"method", "concept_id", "prompt_idx", "seed"};

std::int64_t parse_int(const std::string& s, std::size_t line, const char* what) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw SchemaError("line " + std::to_string(line) + ": " + what + " '" + s + "' is not an integer");
  return v;
}

std::optional<double> parse_value(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  // strtod honours the C locale, which the CLI never changes.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw SchemaError("line " + std::to_string(line) + ": value '" + s + "' is not a finite number");
  return v;
}

}  // namespace

std::optional<std::size_t> ScoreTable::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns.begin());
}

void ScoreTable::sort_by_key() {
  std::stable_sort(rows.begin(), rows.end(), [](const ScoreRow& a, const ScoreRow& b) { return a.key < b.key; });
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      row_has_content = false;
    } else {
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (quoted) throw SchemaError("unterminated quoted CSV field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_csv(const ScoreTable& table) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kKeyColumns); ++i) {
    if (i) out += ',';
    out += kKeyColumns[i];
  }
  for (const auto& c : table.columns) out += "," + csv_escape(c);
  out += '\n';
  for (const auto& row : table.rows) {
    out += csv_escape(row.key.method) + ',' + csv_escape(row.key.concept_id) + ',' +
           std::to_string(row.key.prompt_idx) + ',' + std::to_string(row.key.seed);
    for (const auto& v : row.values) {
      out += ',';
      if (v) out += format_value(*v);
    }
    out += '\n';
  }
  return out;
}

ScoreTable parse_score_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto rows = parse_csv(text);
  if (rows.empty()) throw SchemaError("score table has no header");
  const auto& header = rows.front();
  if (header.size() < std::size(kKeyColumns))
    throw SchemaError("score table header must start with method,concept_id,prompt_idx,seed");
  for (std::size_t i = 0; i < std::size(kKeyColumns); ++i) {
    if (header[i] != kKeyColumns[i])
      throw SchemaError("score table column " + std::to_string(i + 1) + " must be '" +
                        std::string(kKeyColumns[i]) + "', found '" + header[i] + "'");
  }
  ScoreTable table;
  table.columns.assign(header.begin() + std::size(kKeyColumns), header.end());
  std::set<RecordKey> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::size_t line = r + 1;
    if (cells.size() != header.size())
      throw SchemaError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(cells.size()));
    ScoreRow row;
    row.key = RecordKey{cells[0], cells[1], parse_int(cells[2], line, "prompt_idx"),
                        parse_int(cells[3], line, "seed")};
    if (!seen.insert(row.key).second)
      throw SchemaError("line " + std::to_string(line) + ": duplicate key " + row.key.str());
    for (std::size_t c = std::size(kKeyColumns); c < cells.size(); ++c) row.values.push_back(parse_value(cells[c], line));
    table.rows.push_back(std::move(row));
  }
  return table;
}

ScoreTable load_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingAssetError({path.string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_score_csv(buffer.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void save_score_csv(const std::filesystem::path& path, const ScoreTable& table) {
  write_file_atomic(path, to_csv(table));
}

}  // namespace masc
