// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/subject_strip.hpp"

#include <cctype>
#include <regex>

#include "masc/errors.hpp"

namespace masc {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string escape_name(std::string_view name) {
  static constexpr std::string_view kSpecial = R"(\^$.|?*+()[]{}/-)";
  std::string out;
  bool in_space = false;
  for (char c : name) {
    if (is_space(c)) {
      if (!in_space) out += R"(\s+)";
      in_space = true;
      continue;
    }
    in_space = false;
    if (kSpecial.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string strip_subject(std::string_view prompt, std::string_view subject_name, StripMode mode) {
  const std::string name = normalize_whitespace(subject_name);
  if (name.empty()) throw ArgumentError("subject_name must be nonempty");

  // Group 1 is the character before the match (or start of input), kept so
  // that adjacent occurrences can still see their left word boundary.
  const std::regex pattern(R"((^|[^A-Za-z0-9_])(?:(?:a|an|the)\s+)?)" + escape_name(name) +
                               R"((?=[^A-Za-z0-9_]|$))",
                           std::regex::ECMAScript | std::regex::icase);

  std::string current = normalize_whitespace(prompt);
  if (mode == StripMode::FirstOccurrence) {
    return normalize_whitespace(
        std::regex_replace(current, pattern, "$1 ", std::regex_constants::format_first_only));
  }
  for (;;) {
    std::string next = normalize_whitespace(std::regex_replace(current, pattern, "$1 "));
    if (next == current) return next;
    current = std::move(next);
  }
}

}  // namespace masc
