// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

namespace masc {

// Two aligned series over the same keys (metric vs pooled human rating).
class PairedSeries {
 public:
  PairedSeries(std::vector<std::string> keys, std::vector<double> a, std::vector<double> b);

  std::size_t size() const noexcept { return keys_.size(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& b() const noexcept { return b_; }

 private:
  std::vector<std::string> keys_;
  std::vector<double> a_;
  std::vector<double> b_;
};

struct ScorePools {
  std::vector<double> within;
  std::vector<double> cross;
};

enum class AlphaPreprocess {
  MinMaxEach,  // each series rescaled to [0, 1] on its own
  None,
};

// Two-observer interval Krippendorff alpha, 1 - D_o / D_e. Throws
// DegenerateDataError when expected disagreement is zero, and under MinMaxEach
// also when either series is constant.
double krippendorff_alpha_interval(const PairedSeries& s,
                                   AlphaPreprocess preprocess = AlphaPreprocess::MinMaxEach);

// Pearson correlation of mid-ranks. Throws DegenerateDataError for a constant series.
double spearman_rho(const PairedSeries& s);

// P(within > cross) with ties counted as one half. ArgumentError on an empty pool.
double pairwise_auc(const ScorePools& pools);

struct PoolSummary {
  double mean_within = 0.0;
  double sd_within = 0.0;
  double mean_cross = 0.0;
  double sd_cross = 0.0;
  // Difference of means after min-max scaling the union of both pools to [0, 1];
  // zero when the union is constant.
  double delta_norm = 0.0;
};

// Population standard deviations. ArgumentError if either pool has < 2 values.
PoolSummary summarize_pools(const ScorePools& pools);

std::vector<double> min_max_normalize(std::span<const double> values);
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace masc
