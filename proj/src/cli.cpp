// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "masc/agreement_stats.hpp"
#include "masc/errors.hpp"
#include "masc/orida_pairs.hpp"
#include "masc/pooler.hpp"
#include "masc/score_table.hpp"
#include "masc/tensor_store.hpp"
#include "masc/text_embedding.hpp"

namespace masc::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path under(const fs::path& root, const fs::path& p) {
  if (p.empty() || p.is_absolute() || root.empty()) return p;
  return root / p;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingAssetError({path.string()});
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

MetricSelection parse_metric(const std::string& s) {
  if (s == "cp") return MetricSelection::Cp;
  if (s == "pf") return MetricSelection::Pf;
  if (s == "both") return MetricSelection::Both;
  throw ArgumentError("metric must be cp, pf or both, got '" + s + "'");
}

StripMode parse_strip_mode(const std::string& s) {
  if (s == "all") return StripMode::AllOccurrences;
  if (s == "first") return StripMode::FirstOccurrence;
  throw ArgumentError("strip mode must be 'all' or 'first', got '" + s + "'");
}

MutualNnDenominator parse_denominator(const std::string& s) {
  if (s == "foreground_reference") return MutualNnDenominator::ForegroundReference;
  if (s == "all_mutual") return MutualNnDenominator::AllMutual;
  throw ArgumentError("mutual-NN denominator must be foreground_reference or all_mutual, got '" + s + "'");
}

AlphaPreprocess parse_preprocess(const std::string& s) {
  if (s == "minmax") return AlphaPreprocess::MinMaxEach;
  if (s == "none") return AlphaPreprocess::None;
  throw ArgumentError("alpha preprocessing must be 'minmax' or 'none', got '" + s + "'");
}

std::string cell_file(PoolMode mode, bool stripped) {
  return "pf_" + std::string(to_string(mode)) + (stripped ? "_stripped.csv" : "_full.csv");
}

std::string file_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingAssetError({path.string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Streams, not the report JSON, carry diagnostics.
void print_failures(std::ostream& err, const MissingAssetError& e) { err << "error: " << e.what() << '\n'; }

}  // namespace

void RunConfig::merge_json(const json& j) {
  if (!j.is_object()) throw SchemaError("run config must be a JSON object");
  try {
    if (j.contains("metric")) metric = parse_metric(j["metric"].get<std::string>());
    if (j.contains("filter")) filter = FilterPolicy::from_json(j["filter"]);
    if (j.contains("pool_mode")) pool_mode = parse_pool_mode(j["pool_mode"].get<std::string>());
    if (j.contains("strip")) strip = j["strip"].get<bool>();
    if (j.contains("strip_mode")) strip_mode = parse_strip_mode(j["strip_mode"].get<std::string>());
    if (j.contains("aggregator")) cp.aggregator = parse_cp_aggregator(j["aggregator"].get<std::string>());
    if (j.contains("mutual_nn_denominator"))
      cp.denominator = parse_denominator(j["mutual_nn_denominator"].get<std::string>());
    if (j.contains("pf_ablation")) pf_ablation = j["pf_ablation"].get<bool>();
    if (j.contains("pooler")) pooler_dir = j["pooler"].get<std::string>();
    if (j.contains("text_embedding_dir")) text_dir = j["text_embedding_dir"].get<std::string>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) workers = j["workers"].get<unsigned>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid run config: ") + e.what());
  }
}

std::string prepare_prompts_jsonl(const DatasetManifest& manifest, StripMode mode) {
  std::set<std::pair<std::string, std::string>> seen;
  std::string out;
  for (const auto& r : manifest.records) {
    if (!seen.emplace(r.prompt, r.subject_name).second) continue;
    const std::string stripped = strip_subject(r.prompt, r.subject_name, mode);
    out += json{{"prompt_hash", prompt_hash(r.prompt)},
                {"original", r.prompt},
                {"stripped", stripped},
                {"stripped_hash", prompt_hash(stripped)},
                {"subject_name", r.subject_name}}
               .dump();
    out += '\n';
  }
  return out;
}

void score(const RunConfig& config, std::ostream& log) {
  if (config.workers < 1) throw ArgumentError("workers must be >= 1");
  const DatasetManifest manifest =
      config.root ? load_manifest(config.manifest, *config.root) : load_manifest(config.manifest);
  fs::create_directories(config.out_dir);

  const bool want_cp = config.metric != MetricSelection::Pf;
  const bool want_pf = config.metric != MetricSelection::Cp;

  // Style exclusion only ever applies to prompt following.
  FilterPolicy cp_policy = config.filter;
  cp_policy.exclude_style_subjects = false;
  const FilterPolicy& pf_policy = config.filter;

  std::optional<PoolerHead> head;
  PfResources pf;
  if (want_pf) {
    if (!config.pooler_dir) throw ArgumentError("prompt following needs --pooler");
    head = PoolerHead::load(*config.pooler_dir);
    pf.head = &*head;
    pf.strip_mode = config.strip_mode;
    if (config.text_dir) pf.text_dir = *config.text_dir;
    else if (manifest.text_embedding_dir) pf.text_dir = *manifest.text_embedding_dir;
    else throw ArgumentError("prompt following needs --text-dir or a manifest text_embedding_dir");
  }

  RunOptions run;
  run.workers = config.workers;
  run.timing = config.timing ? &log : nullptr;

  std::vector<DropEntry> drops;
  if (want_pf && config.pf_ablation) {
    if (want_cp) {
      CpRun cp = run_cp_benchmark(manifest, cp_policy, config.cp, run);
      save_score_csv(config.out_dir / kCpScoresFile, cp.table);
    }
    PfAblationRun ablation = run_pf_ablation(manifest, pf_policy, pf, run);
    drops = ablation.drops;
    const fs::path dir = config.out_dir / kAblationDir;
    fs::create_directories(dir);
    json cells = json::object();
    for (PoolMode mode : PfAblationGrid::kModes) {
      json row = json::object();
      for (bool stripped : {false, true}) {
        const auto& table = ablation.at(mode, stripped);
        const char* column = stripped ? "stripped" : "full";
        if (!table) {
          row[column] = nullptr;
          continue;
        }
        save_score_csv(dir / cell_file(mode, stripped), *table);
        row[column] = cell_file(mode, stripped);
      }
      cells[std::string(to_string(mode))] = row;
    }
    write_file_atomic(dir / "grid.json", json{{"cells", cells}}.dump(2) + "\n");
  } else if (want_cp && want_pf) {
    JointRun joint = run_joint_benchmark(manifest, cp_policy, pf_policy, config.cp, pf, config.pool_mode,
                                         config.strip, run);
    save_score_csv(config.out_dir / kCpScoresFile, joint.cp);
    save_score_csv(config.out_dir / kPfScoresFile, joint.pf);
    drops = std::move(joint.drops);
  } else if (want_cp) {
    CpRun cp = run_cp_benchmark(manifest, cp_policy, config.cp, run);
    save_score_csv(config.out_dir / kCpScoresFile, cp.table);
    drops = std::move(cp.drops);
  } else {
    PfRun pfr = run_pf_benchmark(manifest, pf_policy, pf, config.pool_mode, config.strip, run);
    save_score_csv(config.out_dir / kPfScoresFile, pfr.table);
    drops = std::move(pfr.drops);
  }
  write_file_atomic(config.out_dir / kDropReportFile, drop_report_jsonl(drops));
}

json agreement_report(const ScoreTable& scores, const ScoreTable& ratings, const AgreementOptions& options) {
  if (scores.columns.empty()) throw SchemaError("score table has no value column");
  const std::string score_column = options.score_column.empty() ? scores.columns.front() : options.score_column;
  const auto score_idx = scores.column_index(score_column);
  if (!score_idx) throw ArgumentError("score table has no column '" + score_column + "'");

  std::vector<std::size_t> rating_idx;
  std::vector<std::string> rating_names = options.rating_columns.empty() ? ratings.columns : options.rating_columns;
  for (const auto& name : rating_names) {
    const auto idx = ratings.column_index(name);
    if (!idx) throw ArgumentError("ratings table has no column '" + name + "'");
    rating_idx.push_back(*idx);
  }
  if (rating_idx.empty()) throw SchemaError("ratings table has no value column");

  std::map<RecordKey, double> pooled;
  for (const auto& row : ratings.rows) {
    double sum = 0.0;
    int n = 0;
    for (auto idx : rating_idx) {
      if (row.values[idx]) {
        sum += *row.values[idx];
        ++n;
      }
    }
    if (n > 0) pooled[row.key] = sum / n;
  }

  std::vector<std::string> keys;
  std::vector<double> a, b;
  std::size_t unmatched_scores = 0;
  std::set<RecordKey> matched;
  for (const auto& row : scores.rows) {
    const auto& v = row.values[*score_idx];
    const auto it = pooled.find(row.key);
    if (!v || it == pooled.end()) {
      ++unmatched_scores;
      continue;
    }
    keys.push_back(row.key.str());
    a.push_back(*v);
    b.push_back(it->second);
    matched.insert(row.key);
  }
  const std::size_t unmatched_ratings = pooled.size() - matched.size();
  if (keys.empty()) throw DataError("score and rating tables share no key");

  json report = {{"joined_keys", keys.size()},
                 {"unmatched_score_keys", unmatched_scores},
                 {"unmatched_rating_keys", unmatched_ratings},
                 {"score_column", score_column},
                 {"rating_columns", rating_names}};
  const PairedSeries series(std::move(keys), std::move(a), std::move(b));
  if (options.alpha) {
    report["alpha"] = krippendorff_alpha_interval(series, options.preprocess);
    report["alpha_preprocess"] = options.preprocess == AlphaPreprocess::MinMaxEach ? "minmax" : "none";
  }
  if (options.rho) report["rho"] = spearman_rho(series);
  return report;
}

json auc_report(const ScoreTable& scores, const OridaPairPlan& plan, const std::string& score_column,
                const std::set<RecordKey>& skip) {
  if (scores.columns.empty()) throw SchemaError("score table has no value column");
  const std::string column = score_column.empty() ? scores.columns.front() : score_column;
  const auto idx = scores.column_index(column);
  if (!idx) throw ArgumentError("score table has no column '" + column + "'");
  std::map<RecordKey, double> by_key;
  for (const auto& row : scores.rows) {
    if (row.values[*idx]) by_key[row.key] = *row.values[*idx];
  }

  ScorePools pools;
  std::vector<std::string> missing;
  std::size_t skipped = 0;
  auto collect = [&](std::size_t count, auto key_of, std::vector<double>& pool) {
    for (std::size_t i = 0; i < count; ++i) {
      const RecordKey key = key_of(plan, i);
      if (skip.count(key)) {
        ++skipped;
        continue;
      }
      const auto it = by_key.find(key);
      if (it == by_key.end()) missing.push_back(key.str());
      else pool.push_back(it->second);
    }
  };
  collect(plan.within_pairs.size(), within_pair_key, pools.within);
  collect(plan.cross_pairs.size(), cross_pair_key, pools.cross);
  if (!missing.empty()) {
    std::string what = "pair score(s) missing for " + std::to_string(missing.size()) + " key(s):";
    for (const auto& k : missing) what += "\n  " + k;
    throw MissingAssetError(std::move(missing), what);
  }

  const PoolSummary summary = summarize_pools(pools);
  return {{"auc", pairwise_auc(pools)},
          {"score_column", column},
          {"skipped_pairs", skipped},
          {"within", {{"n", pools.within.size()}, {"mean", summary.mean_within}, {"sd", summary.sd_within}}},
          {"cross", {{"n", pools.cross.size()}, {"mean", summary.mean_cross}, {"sd", summary.sd_cross}}},
          {"delta_norm", summary.delta_norm}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("masc");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Masked patch-token evaluation engine for concept preservation and prompt following"};
  app.require_subcommand(1);
  std::string root = ".";
  app.add_option("--root", root, "Base directory for every relative path")->capture_default_str();

  // prepare-prompts
  std::string pp_manifest, pp_out, pp_strip_mode = "all";
  auto* prepare = app.add_subcommand("prepare-prompts", "Emit the prompt list the text encoder must embed");
  prepare->add_option("--manifest", pp_manifest)->required();
  prepare->add_option("--out", pp_out)->required();
  prepare->add_option("--strip-mode", pp_strip_mode)->check(CLI::IsMember({"all", "first"}));

  // score
  std::string sc_manifest, sc_out, sc_config, sc_filter, sc_metric, sc_pool_mode, sc_strip_mode, sc_pooler, sc_text,
      sc_aggregator, sc_denominator;
  bool sc_no_strip = false, sc_strip = false, sc_ablation = false, sc_timing = false;
  std::uint64_t sc_seed = 0;
  unsigned sc_workers = 1;
  auto* score_cmd = app.add_subcommand("score", "Score every kept record and write CSV tables");
  score_cmd->add_option("--manifest", sc_manifest)->required();
  score_cmd->add_option("--out-dir", sc_out)->required();
  score_cmd->add_option("--config", sc_config, "Run config JSON (flags override it)");
  score_cmd->add_option("--filter-policy", sc_filter, "Filter policy JSON");
  auto* o_metric = score_cmd->add_option("--metric", sc_metric)->check(CLI::IsMember({"cp", "pf", "both"}));
  auto* o_pool = score_cmd->add_option("--pool-mode", sc_pool_mode)
                     ->check(CLI::IsMember({"background", "full", "foreground", "bg", "fg"}));
  auto* o_strip = score_cmd->add_flag("--strip", sc_strip, "Score PF against the subject-stripped prompt");
  auto* o_no_strip = score_cmd->add_flag("--no-strip", sc_no_strip, "Score PF against the full prompt");
  o_strip->excludes(o_no_strip);
  auto* o_strip_mode = score_cmd->add_option("--strip-mode", sc_strip_mode)->check(CLI::IsMember({"all", "first"}));
  auto* o_pooler = score_cmd->add_option("--pooler", sc_pooler, "Pooler head directory");
  auto* o_text = score_cmd->add_option("--text-dir", sc_text, "Text embedding directory");
  auto* o_agg = score_cmd->add_option("--aggregator", sc_aggregator)
                    ->check(CLI::IsMember({"masked_maxcos", "mutual_nn_fg_recall"}));
  auto* o_den = score_cmd->add_option("--mnn-denominator", sc_denominator)
                    ->check(CLI::IsMember({"foreground_reference", "all_mutual"}));
  auto* o_ablation = score_cmd->add_flag("--pf-ablation", sc_ablation, "Write the pooling x prompt ablation grid");
  auto* o_seed = score_cmd->add_option("--seed", sc_seed);
  auto* o_workers = score_cmd->add_option("--workers", sc_workers)->check(CLI::PositiveNumber);
  score_cmd->add_flag("--timing", sc_timing, "Print per-pair wall time to stderr");

  // agreement
  std::string ag_scores, ag_ratings, ag_out, ag_column, ag_measures = "alpha,rho", ag_pre = "minmax";
  std::vector<std::string> ag_rating_columns;
  auto* agreement = app.add_subcommand("agreement", "Krippendorff alpha / Spearman rho against pooled ratings");
  agreement->add_option("--scores", ag_scores)->required();
  agreement->add_option("--ratings", ag_ratings)->required();
  agreement->add_option("--score-column", ag_column);
  agreement->add_option("--rating-columns", ag_rating_columns)->delimiter(',');
  agreement->add_option("--measures", ag_measures, "Comma list of alpha, rho");
  agreement->add_option("--alpha-preprocess", ag_pre)->check(CLI::IsMember({"minmax", "none"}));
  agreement->add_option("--out", ag_out, "Also write the report here");

  // auc
  std::string auc_scores, auc_plan, auc_column, auc_out, auc_drops;
  auto* auc = app.add_subcommand("auc", "Within-vs-cross pair AUC with pool summaries");
  auc->add_option("--scores", auc_scores)->required();
  auc->add_option("--plan", auc_plan)->required();
  auc->add_option("--score-column", auc_column);
  auc->add_option("--drop-report", auc_drops, "Skip pairs listed in this drop report");
  auc->add_option("--out", auc_out);

  // orida-pairs
  std::string op_inventory, op_out, op_manifest_out;
  std::uint64_t op_seed = 0;
  PairAssetTemplates op_templates;
  auto* orida = app.add_subcommand("orida-pairs", "Build the within/cross pair plan for an identity benchmark");
  orida->add_option("--inventory", op_inventory, "JSON: subject -> environment -> [asset ids]")->required();
  orida->add_option("--seed", op_seed)->capture_default_str();
  orida->add_option("--out", op_out)->required();
  orida->add_option("--manifest-out", op_manifest_out, "Also write a scoring manifest with one record per pair");
  orida->add_option("--patch-template", op_templates.patch)->capture_default_str();
  orida->add_option("--mask-template", op_templates.mask)->capture_default_str();

  // filter-report
  std::string fr_manifest, fr_out, fr_filter;
  bool fr_pf = false;
  auto* filter = app.add_subcommand("filter-report", "Apply the area / style filter and write the drop report");
  filter->add_option("--manifest", fr_manifest)->required();
  filter->add_option("--filter-policy", fr_filter);
  filter->add_option("--out", fr_out)->required();
  filter->add_flag("--pf", fr_pf, "Apply style exclusion as for prompt following");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const fs::path base(root);
  const bool rooted = app.get_option("--root")->count() > 0;
  const fs::path manifest_root = rooted ? base : fs::path{};
  try {
    if (*prepare) {
      const auto manifest = load_manifest(under(base, pp_manifest), manifest_root);
      write_file_atomic(under(base, pp_out), prepare_prompts_jsonl(manifest, parse_strip_mode(pp_strip_mode)));
      return kOk;
    }

    if (*score_cmd) {
      RunConfig config;
      if (!sc_config.empty()) config.merge_json(read_json_file(under(base, sc_config)));
      if (!sc_filter.empty()) config.filter = FilterPolicy::from_json(read_json_file(under(base, sc_filter)));
      if (config.pooler_dir) config.pooler_dir = under(base, *config.pooler_dir);
      if (config.text_dir) config.text_dir = under(base, *config.text_dir);
      if (*o_metric) config.metric = parse_metric(sc_metric);
      if (*o_pool) config.pool_mode = parse_pool_mode(sc_pool_mode);
      if (*o_strip) config.strip = true;
      if (*o_no_strip) config.strip = false;
      if (*o_strip_mode) config.strip_mode = parse_strip_mode(sc_strip_mode);
      if (*o_pooler) config.pooler_dir = under(base, sc_pooler);
      if (*o_text) config.text_dir = under(base, sc_text);
      if (*o_agg) config.cp.aggregator = parse_cp_aggregator(sc_aggregator);
      if (*o_den) config.cp.denominator = parse_denominator(sc_denominator);
      if (*o_ablation) config.pf_ablation = sc_ablation;
      if (*o_seed) config.seed = sc_seed;
      if (*o_workers) config.workers = sc_workers;
      config.timing = sc_timing;
      config.manifest = under(base, sc_manifest);
      config.out_dir = under(base, sc_out);
      if (rooted) config.root = base;
      score(config, err);
      return kOk;
    }

    if (*agreement) {
      AgreementOptions options;
      options.score_column = ag_column;
      options.rating_columns = ag_rating_columns;
      options.alpha = ag_measures.find("alpha") != std::string::npos;
      options.rho = ag_measures.find("rho") != std::string::npos;
      if (!options.alpha && !options.rho) throw ArgumentError("--measures must name alpha and/or rho");
      options.preprocess = parse_preprocess(ag_pre);
      const json report = agreement_report(load_score_csv(under(base, ag_scores)),
                                           load_score_csv(under(base, ag_ratings)), options);
      const std::string text = report.dump(2) + "\n";
      if (!ag_out.empty()) write_file_atomic(under(base, ag_out), text);
      out << text;
      return kOk;
    }

    if (*auc) {
      std::set<RecordKey> skip;
      if (!auc_drops.empty()) {
        std::istringstream lines(file_text(under(base, auc_drops)));
        for (std::string line; std::getline(lines, line);) {
          if (line.empty()) continue;
          const json entry = json::parse(line);
          const auto& k = entry.at("key");
          skip.insert(RecordKey{k.at("method").get<std::string>(), k.at("concept_id").get<std::string>(),
                                k.at("prompt_idx").get<std::int64_t>(), k.at("seed").get<std::int64_t>()});
        }
      }
      const json report = auc_report(load_score_csv(under(base, auc_scores)),
                                     plan_from_json(read_json_file(under(base, auc_plan))), auc_column, skip);
      const std::string text = report.dump(2) + "\n";
      if (!auc_out.empty()) write_file_atomic(under(base, auc_out), text);
      out << text;
      return kOk;
    }

    if (*orida) {
      const OridaPairPlan plan = build_orida_pairs(inventory_from_json(read_json_file(under(base, op_inventory))), op_seed);
      write_file_atomic(under(base, op_out), plan_to_json(plan).dump(1) + "\n");
      if (!op_manifest_out.empty())
        write_file_atomic(under(base, op_manifest_out), plan_manifest(plan, op_templates).dump(1) + "\n");
      out << "within_pairs " << plan.within_pairs.size() << "\ncross_pairs " << plan.cross_pairs.size() << "\n";
      return kOk;
    }

    if (*filter) {
      FilterPolicy policy;
      if (!fr_filter.empty()) policy = FilterPolicy::from_json(read_json_file(under(base, fr_filter)));
      if (!fr_pf) policy.exclude_style_subjects = false;
      const auto manifest = load_manifest(under(base, fr_manifest), manifest_root);
      const FilterResult result = apply_filter(manifest, policy);
      write_file_atomic(under(base, fr_out), drop_report_jsonl(result.drops));
      std::map<std::string, std::size_t> counts;
      for (const auto& d : result.drops) ++counts[std::string(to_string(d.reason))];
      out << "kept " << result.kept.records.size() << "\ndropped " << result.drops.size() << "\n";
      for (const auto& [reason, n] : counts) out << "  " << reason << ' ' << n << "\n";
      return kOk;
    }
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const MissingAssetError& e) {
    print_failures(err, e);
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace masc::cli
