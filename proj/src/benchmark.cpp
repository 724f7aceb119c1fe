// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "masc/mask_ops.hpp"
#include "masc/text_embedding.hpp"

namespace masc {
namespace {

using Clock = std::chrono::steady_clock;

// Loads each key once; concurrent callers for the same key wait on the first.
template <class V>
class SharedCache {
 public:
  template <class Loader>
  std::shared_ptr<const V> get(const std::string& key, Loader&& load) {
    std::shared_future<std::shared_ptr<const V>> future;
    std::optional<std::promise<std::shared_ptr<const V>>> promise;
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) {
        future = it->second;
      } else {
        promise.emplace();
        future = promise->get_future().share();
        entries_.emplace(key, future);
        ++loads_;
      }
    }
    if (promise) {
      try {
        promise->set_value(std::make_shared<const V>(load()));
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    }
    return future.get();
  }

  std::size_t loads() {
    std::lock_guard lock(mutex_);
    return loads_;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_future<std::shared_ptr<const V>>> entries_;
  std::size_t loads_ = 0;
};

struct Reference {
  UnitTokens unit;
  PatchMask mask;
};

enum class PfKind { None, Single, Ablation };

struct Job {
  const EvalRecord* record = nullptr;
  bool cp = false;
  bool pf = false;
};

struct JobResult {
  std::optional<CpScore> cp;
  std::optional<double> cp_recall;
  std::optional<float> pf;
  std::optional<PfAblationGrid> grid;
  double millis = 0.0;
};

struct EngineConfig {
  CpOptions cp;
  const PfResources* pf = nullptr;
  PfKind pf_kind = PfKind::None;
  PoolMode mode = PoolMode::Background;
  bool stripped = true;
  RunOptions run;
};

using TextMap = std::map<std::string, TextEmbedding>;

// Every embedding the jobs need, loaded up front so a missing one fails the
// run before any scoring happens.
TextMap load_texts(const std::vector<Job>& jobs, const EngineConfig& cfg) {
  TextMap texts;
  if (cfg.pf_kind == PfKind::None) return texts;
  std::vector<bool> variants;
  if (cfg.pf_kind == PfKind::Single) variants = {cfg.stripped};
  else variants = {false, true};

  std::vector<std::string> missing;
  std::set<std::string> missing_seen;
  std::string message;
  for (const auto& job : jobs) {
    if (!job.pf) continue;
    for (bool stripped : variants) {
      const std::string hash = prompt_hash(prompt_variant(*job.record, stripped, cfg.pf->strip_mode));
      if (texts.count(hash) || missing_seen.count(hash)) continue;
      if (!std::filesystem::is_regular_file(text_embedding_path(cfg.pf->text_dir, hash))) {
        missing_seen.insert(hash);
        missing.push_back(text_embedding_path(cfg.pf->text_dir, hash).string());
        message += "\n  " + job.record->key.str() + ": prompt_hash " + hash +
                   (stripped ? " (stripped)" : " (full)");
        continue;
      }
      texts.emplace(hash, load_text_embedding(cfg.pf->text_dir, hash));
    }
  }
  if (!missing.empty())
    throw MissingAssetError(std::move(missing),
                            "missing text embedding(s) in " + cfg.pf->text_dir.string() + ":" + message);
  return texts;
}

struct EngineOutput {
  std::vector<JobResult> results;
  BenchmarkStats stats;
};

EngineOutput run_jobs(const std::vector<Job>& jobs, const EngineConfig& cfg) {
  if (cfg.pf_kind != PfKind::None && (cfg.pf == nullptr || cfg.pf->head == nullptr))
    throw ArgumentError("prompt-following run needs a pooler head");
  const TextMap texts = load_texts(jobs, cfg);

  SharedCache<Reference> references;
  std::atomic<std::size_t> generated_loads{0};
  std::vector<JobResult> results(jobs.size());
  std::vector<std::optional<std::string>> errors(jobs.size());

  auto score_one = [&](const Job& job) {
    const EvalRecord& rec = *job.record;
    JobResult out;
    const auto start = Clock::now();
    const PatchGrid gen = PatchGrid::load(rec.gen_patch_path);
    ++generated_loads;
    const PatchMask gen_mask = downsample_mask(load_mask_png(rec.gen_mask_path), gen.grid_h(), gen.grid_w());

    if (job.cp) {
      const auto ref = references.get(rec.ref_patch_path.string() + '\n' + rec.ref_mask_path.string(), [&] {
        const PatchGrid grid = PatchGrid::load(rec.ref_patch_path);
        return Reference{unit_tokens(grid),
                         downsample_mask(load_mask_png(rec.ref_mask_path), grid.grid_h(), grid.grid_w())};
      });
      const UnitTokens gen_unit = unit_tokens(gen);
      if (cfg.cp.aggregator == CpAggregator::MaskedMaxcos)
        out.cp = masked_maxcos(ref->unit, gen_unit, ref->mask);
      else
        out.cp_recall = mutual_nn_fg_recall(ref->unit, gen_unit, ref->mask, gen_mask, cfg.cp.denominator);
    }
    if (job.pf) {
      const auto& head = *cfg.pf->head;
      auto text_for = [&](bool stripped) -> const TextEmbedding& {
        return texts.at(prompt_hash(prompt_variant(rec, stripped, cfg.pf->strip_mode)));
      };
      if (cfg.pf_kind == PfKind::Single)
        out.pf = pf_score(gen, gen_mask, head, text_for(cfg.stripped), cfg.mode, cfg.stripped).value;
      else
        out.grid = pf_ablation_grid(gen, gen_mask, head, text_for(false), text_for(true));
    }
    out.millis = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return out;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = score_one(jobs[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.run.workers, static_cast<unsigned>(jobs.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<std::pair<RecordKey, std::string>> failures;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i]) failures.emplace_back(jobs[i].record->key, *errors[i]);
  }
  if (!failures.empty()) throw BatchError(std::move(failures));

  if (cfg.run.timing) {
    std::vector<std::size_t> order(jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return jobs[a].record->key < jobs[b].record->key; });
    for (std::size_t i : order) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", results[i].millis);
      *cfg.run.timing << jobs[i].record->key.str() << ' ' << buf << " ms\n";
    }
  }
  return EngineOutput{std::move(results), BenchmarkStats{references.loads(), generated_loads.load()}};
}

std::vector<Job> jobs_for(const DatasetManifest& kept, bool cp, bool pf) {
  std::vector<Job> jobs;
  jobs.reserve(kept.records.size());
  for (const auto& r : kept.records) jobs.push_back(Job{&r, cp, pf});
  return jobs;
}

ScoreTable cp_table(const std::vector<Job>& jobs, const std::vector<JobResult>& results, const CpOptions& cp) {
  ScoreTable table;
  const bool maxcos = cp.aggregator == CpAggregator::MaskedMaxcos;
  table.columns = maxcos ? std::vector<std::string>{"cp", "fg_count"} : std::vector<std::string>{"cp_mnn_recall"};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!jobs[i].cp) continue;
    ScoreRow row{jobs[i].record->key, {}};
    if (maxcos)
      row.values = {static_cast<double>(results[i].cp->value), static_cast<double>(results[i].cp->fg_count)};
    else
      row.values = {*results[i].cp_recall};
    table.rows.push_back(std::move(row));
  }
  table.sort_by_key();
  return table;
}

ScoreTable pf_table(const std::vector<Job>& jobs, const std::vector<JobResult>& results) {
  ScoreTable table;
  table.columns = {"pf"};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].pf) table.rows.push_back(ScoreRow{jobs[i].record->key, {static_cast<double>(*results[i].pf)}});
  }
  table.sort_by_key();
  return table;
}

std::size_t mode_slot(PoolMode mode) {
  return static_cast<std::size_t>(std::find(PfAblationGrid::kModes.begin(), PfAblationGrid::kModes.end(), mode) -
                                  PfAblationGrid::kModes.begin());
}

}  // namespace

std::string_view to_string(CpAggregator a) {
  return a == CpAggregator::MaskedMaxcos ? "masked_maxcos" : "mutual_nn_fg_recall";
}

CpAggregator parse_cp_aggregator(std::string_view text) {
  if (text == "masked_maxcos" || text == "maxcos") return CpAggregator::MaskedMaxcos;
  if (text == "mutual_nn_fg_recall" || text == "mutual_nn") return CpAggregator::MutualNnFgRecall;
  throw ArgumentError("unknown CP aggregator '" + std::string(text) + "'");
}

static std::string describe_failures(const std::vector<std::pair<RecordKey, std::string>>& failures) {
  std::string out = std::to_string(failures.size()) + " record(s) failed:";
  for (const auto& [key, why] : failures) out += "\n  " + key.str() + ": " + why;
  return out;
}

BatchError::BatchError(std::vector<std::pair<RecordKey, std::string>> failures)
    : DataFailure(describe_failures(failures)), failures_(std::move(failures)) {}

std::string prompt_variant(const EvalRecord& record, bool stripped, StripMode mode) {
  return stripped ? strip_subject(record.prompt, record.subject_name, mode) : record.prompt;
}

CpRun run_cp_benchmark(const DatasetManifest& manifest, const FilterPolicy& policy, const CpOptions& cp,
                       const RunOptions& run) {
  FilterResult filtered = apply_filter(manifest, policy);
  const auto jobs = jobs_for(filtered.kept, true, false);
  EngineConfig cfg;
  cfg.cp = cp;
  cfg.run = run;
  auto out = run_jobs(jobs, cfg);
  return CpRun{cp_table(jobs, out.results, cp), std::move(filtered.drops), out.stats};
}

PfRun run_pf_benchmark(const DatasetManifest& manifest, const FilterPolicy& policy, const PfResources& pf,
                       PoolMode mode, bool stripped, const RunOptions& run) {
  FilterResult filtered = apply_filter(manifest, policy);
  const auto jobs = jobs_for(filtered.kept, false, true);
  EngineConfig cfg;
  cfg.pf = &pf;
  cfg.pf_kind = PfKind::Single;
  cfg.mode = mode;
  cfg.stripped = stripped;
  cfg.run = run;
  auto out = run_jobs(jobs, cfg);
  return PfRun{pf_table(jobs, out.results), std::move(filtered.drops), out.stats};
}

const std::optional<ScoreTable>& PfAblationRun::at(PoolMode mode, bool stripped) const {
  return tables[mode_slot(mode)][stripped ? 1 : 0];
}

PfAblationRun run_pf_ablation(const DatasetManifest& manifest, const FilterPolicy& policy, const PfResources& pf,
                              const RunOptions& run) {
  FilterResult filtered = apply_filter(manifest, policy);
  const auto jobs = jobs_for(filtered.kept, false, true);
  EngineConfig cfg;
  cfg.pf = &pf;
  cfg.pf_kind = PfKind::Ablation;
  cfg.run = run;
  auto out = run_jobs(jobs, cfg);

  PfAblationRun result;
  result.drops = std::move(filtered.drops);
  for (PoolMode mode : PfAblationGrid::kModes) {
    for (bool stripped : {false, true}) {
      if (!PfAblationGrid::valid_cell(mode, stripped)) continue;
      ScoreTable table;
      table.columns = {"pf"};
      for (std::size_t i = 0; i < jobs.size(); ++i)
        table.rows.push_back(ScoreRow{jobs[i].record->key, {static_cast<double>(*out.results[i].grid->at(mode, stripped))}});
      table.sort_by_key();
      result.tables[mode_slot(mode)][stripped ? 1 : 0] = std::move(table);
    }
  }
  return result;
}

JointRun run_joint_benchmark(const DatasetManifest& manifest, const FilterPolicy& cp_policy,
                             const FilterPolicy& pf_policy, const CpOptions& cp, const PfResources& pf,
                             PoolMode mode, bool stripped, const RunOptions& run) {
  const FilterResult cp_filtered = apply_filter(manifest, cp_policy);
  const FilterResult pf_filtered = apply_filter(manifest, pf_policy);
  std::set<RecordKey> cp_keep, pf_keep;
  for (const auto& r : cp_filtered.kept.records) cp_keep.insert(r.key);
  for (const auto& r : pf_filtered.kept.records) pf_keep.insert(r.key);

  std::vector<Job> jobs;
  for (const auto& r : manifest.records) {
    const bool do_cp = cp_keep.count(r.key) > 0;
    const bool do_pf = pf_keep.count(r.key) > 0;
    if (do_cp || do_pf) jobs.push_back(Job{&r, do_cp, do_pf});
  }

  EngineConfig cfg;
  cfg.cp = cp;
  cfg.pf = &pf;
  cfg.pf_kind = PfKind::Single;
  cfg.mode = mode;
  cfg.stripped = stripped;
  cfg.run = run;
  auto out = run_jobs(jobs, cfg);

  JointRun result;
  result.cp = cp_table(jobs, out.results, cp);
  result.pf = pf_table(jobs, out.results);
  result.stats = out.stats;

  std::map<RecordKey, DropReason> reasons;
  for (const auto& d : pf_filtered.drops) reasons[d.key] = d.reason;
  for (const auto& d : cp_filtered.drops) reasons[d.key] = d.reason;
  for (const auto& r : manifest.records) {
    if (auto it = reasons.find(r.key); it != reasons.end()) result.drops.push_back({r.key, it->second});
  }
  return result;
}

}  // namespace masc
