// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "masc/agreement_stats.hpp"
#include "masc/benchmark.hpp"
#include "masc/filtering.hpp"
#include "masc/manifest.hpp"
#include "masc/orida_pairs.hpp"
#include "masc/pf_scoring.hpp"
#include "masc/subject_strip.hpp"

namespace masc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

enum class MetricSelection { Cp, Pf, Both };

// Settings for `score`. A JSON config file provides defaults, flags override.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  // Record paths resolve against this; unset means the manifest's directory.
  std::optional<std::filesystem::path> root;
  MetricSelection metric = MetricSelection::Both;
  FilterPolicy filter;
  PoolMode pool_mode = PoolMode::Background;
  bool strip = true;
  StripMode strip_mode = StripMode::AllOccurrences;
  CpOptions cp;
  bool pf_ablation = false;
  std::optional<std::filesystem::path> pooler_dir;
  std::optional<std::filesystem::path> text_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool timing = false;

  // Applies the keys present in `j` on top of the current values.
  void merge_json(const nlohmann::json& j);
};

// One JSON line per distinct (prompt, subject_name), in first-seen order:
// {"original","prompt_hash","stripped","stripped_hash","subject_name"}.
std::string prepare_prompts_jsonl(const DatasetManifest& manifest, StripMode mode);

// Files written by `score`, relative to the output directory.
inline constexpr const char* kCpScoresFile = "cp_scores.csv";
inline constexpr const char* kPfScoresFile = "pf_scores.csv";
inline constexpr const char* kDropReportFile = "drop_report.jsonl";
inline constexpr const char* kAblationDir = "pf_ablation";

// Runs `score` with an already-resolved config; throws on failure.
void score(const RunConfig& config, std::ostream& log);

// Inner join of a score column with pooled ratings (mean of the non-empty
// rating columns per key), then alpha and/or rho.
struct AgreementOptions {
  std::string score_column;                 // empty: first value column
  std::vector<std::string> rating_columns;  // empty: every value column
  bool alpha = true;
  bool rho = true;
  AlphaPreprocess preprocess = AlphaPreprocess::MinMaxEach;
};
nlohmann::json agreement_report(const ScoreTable& scores, const ScoreTable& ratings, const AgreementOptions& options);

// Pools pair scores by the plan. Pairs whose key is listed in `skip` are left
// out; any other pair without a score raises MissingAssetError naming the keys.
nlohmann::json auc_report(const ScoreTable& scores, const OridaPairPlan& plan, const std::string& score_column,
                          const std::set<RecordKey>& skip = {});

// Full command-line entry point. Never throws; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace masc::cli
