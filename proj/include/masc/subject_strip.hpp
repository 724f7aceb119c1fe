// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace masc {

enum class StripMode {
  AllOccurrences,
  FirstOccurrence,
};

// Removes the subject name, together with an optional leading "a", "an" or
// "the", wherever it appears as a whole word (case-insensitive). The name is
// matched literally apart from internal whitespace, which matches any run of
// whitespace. Whitespace is then collapsed and trimmed. In AllOccurrences mode
// removal repeats until no occurrence remains, so the result is a fixed point.
// An empty result is returned as-is. Throws ArgumentError for an empty name.
std::string strip_subject(std::string_view prompt, std::string_view subject_name,
                          StripMode mode = StripMode::AllOccurrences);

std::string normalize_whitespace(std::string_view text);

}  // namespace masc
