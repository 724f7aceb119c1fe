// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end scoring over a manifest. Reference grids are normalised once per
// distinct reference file and shared by every record that uses it; each
// generated grid is read once and feeds both the CP and PF branches. Output
// rows are sorted by key, so results never depend on worker count or
// manifest order.

#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "masc/cp_scoring.hpp"
#include "masc/errors.hpp"
#include "masc/filtering.hpp"
#include "masc/manifest.hpp"
#include "masc/pf_scoring.hpp"
#include "masc/pooler.hpp"
#include "masc/score_table.hpp"
#include "masc/subject_strip.hpp"

namespace masc {

enum class CpAggregator { MaskedMaxcos, MutualNnFgRecall };

std::string_view to_string(CpAggregator a);
CpAggregator parse_cp_aggregator(std::string_view text);

struct CpOptions {
  CpAggregator aggregator = CpAggregator::MaskedMaxcos;
  MutualNnDenominator denominator = MutualNnDenominator::ForegroundReference;
};

struct PfResources {
  const PoolerHead* head = nullptr;
  std::filesystem::path text_dir;
  StripMode strip_mode = StripMode::AllOccurrences;
};

struct RunOptions {
  unsigned workers = 1;
  // When set, one line per scored record: "<key> <milliseconds>", sorted by key.
  std::ostream* timing = nullptr;
};

// Raised after a batch finishes when one or more records failed; carries one
// diagnostic per failing key.
class BatchError : public DataFailure {
 public:
  explicit BatchError(std::vector<std::pair<RecordKey, std::string>> failures);
  const std::vector<std::pair<RecordKey, std::string>>& failures() const noexcept { return failures_; }

 private:
  std::vector<std::pair<RecordKey, std::string>> failures_;
};

struct BenchmarkStats {
  std::size_t reference_loads = 0;
  std::size_t generated_loads = 0;
};

struct CpRun {
  ScoreTable table;
  std::vector<DropEntry> drops;
  BenchmarkStats stats;
};

CpRun run_cp_benchmark(const DatasetManifest& manifest, const FilterPolicy& policy, const CpOptions& cp = {},
                       const RunOptions& run = {});

struct PfRun {
  ScoreTable table;
  std::vector<DropEntry> drops;
  BenchmarkStats stats;
};

// Requires an embedding for every kept record's prompt variant; the whole set
// is checked before scoring and all absent hashes are reported together.
PfRun run_pf_benchmark(const DatasetManifest& manifest, const FilterPolicy& policy, const PfResources& pf,
                       PoolMode mode, bool stripped, const RunOptions& run = {});

struct PfAblationRun {
  // tables[mode index][0 = full prompt, 1 = stripped]; Foreground x stripped
  // stays empty.
  std::array<std::array<std::optional<ScoreTable>, 2>, 3> tables;
  std::vector<DropEntry> drops;

  const std::optional<ScoreTable>& at(PoolMode mode, bool stripped) const;
};

PfAblationRun run_pf_ablation(const DatasetManifest& manifest, const FilterPolicy& policy, const PfResources& pf,
                              const RunOptions& run = {});

struct JointRun {
  ScoreTable cp;
  ScoreTable pf;
  std::vector<DropEntry> drops;  // union over both branches, manifest order
  BenchmarkStats stats;
};

// CP over records kept by `cp_policy`, PF over records kept by `pf_policy`,
// reading each generated grid once.
JointRun run_joint_benchmark(const DatasetManifest& manifest, const FilterPolicy& cp_policy,
                             const FilterPolicy& pf_policy, const CpOptions& cp, const PfResources& pf,
                             PoolMode mode, bool stripped, const RunOptions& run = {});

// Text that must be embedded for a record's prompt variant.
std::string prompt_variant(const EvalRecord& record, bool stripped, StripMode mode);

}  // namespace masc
