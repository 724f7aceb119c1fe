// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/agreement_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "masc/errors.hpp"

namespace masc {
namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError(std::string(what) + " contains a non-finite value");
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_sd(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

PairedSeries::PairedSeries(std::vector<std::string> keys, std::vector<double> a, std::vector<double> b)
    : keys_(std::move(keys)), a_(std::move(a)), b_(std::move(b)) {
  if (keys_.size() != a_.size() || keys_.size() != b_.size())
    throw ArgumentError("paired series lengths differ");
  if (keys_.size() < 2) throw ArgumentError("paired series needs at least two keys");
  if (std::set<std::string>(keys_.begin(), keys_.end()).size() != keys_.size())
    throw ArgumentError("paired series keys are not unique");
  check_finite(a_, "series a");
  check_finite(b_, "series b");
}

std::vector<double> min_max_normalize(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw DegenerateDataError("cannot min-max normalise a constant series");
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - *lo) / range; });
  return out;
}

double krippendorff_alpha_interval(const PairedSeries& s, AlphaPreprocess preprocess) {
  std::vector<double> a = s.a();
  std::vector<double> b = s.b();
  if (preprocess == AlphaPreprocess::MinMaxEach) {
    a = min_max_normalize(a);
    b = min_max_normalize(b);
  }
  // Every unit carries two pairable values, so n = 2U and each unit adds
  // o[a][b] = o[b][a] = 1 to the coincidence matrix. With the interval
  // metric the sums collapse to:
  //   D_o = (1/n) sum_u 2 (a_u - b_u)^2
  //   D_e = (1/(n(n-1))) sum_{c,k} n_c n_k (c-k)^2 = 2 SS / (n - 1)
  // where SS is the sum of squared deviations of all 2U pooled values.
  const double n = 2.0 * static_cast<double>(s.size());
  double observed = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) observed += 2.0 * (a[u] - b[u]) * (a[u] - b[u]);
  observed /= n;

  double total = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) total += a[u] + b[u];
  const double mean = total / n;
  double ss = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) ss += (a[u] - mean) * (a[u] - mean) + (b[u] - mean) * (b[u] - mean);
  const double expected = 2.0 * ss / (n - 1.0);
  if (!(expected > 0.0)) throw DegenerateDataError("expected disagreement is zero (all values identical)");
  return 1.0 - observed / expected;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    // Ranks start..end-1 (0-based) share their mean, 1-based.
    const double mid = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = mid;
    start = end;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ArgumentError("pearson needs two equal series of length >= 2");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DegenerateDataError("correlation undefined for a constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman_rho(const PairedSeries& s) {
  const auto ra = average_ranks(s.a());
  const auto rb = average_ranks(s.b());
  return pearson(ra, rb);
}

double pairwise_auc(const ScorePools& pools) {
  if (pools.within.empty() || pools.cross.empty()) throw ArgumentError("AUC needs two nonempty pools");
  check_finite(pools.within, "within pool");
  check_finite(pools.cross, "cross pool");
  std::vector<double> cross = pools.cross;
  std::sort(cross.begin(), cross.end());
  // Doubled credit keeps the tally integral: 2 per win, 1 per tie.
  std::uint64_t credit = 0;
  for (double w : pools.within) {
    const auto lo = std::lower_bound(cross.begin(), cross.end(), w);
    const auto hi = std::upper_bound(lo, cross.end(), w);
    credit += 2 * static_cast<std::uint64_t>(lo - cross.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  const double pairs = static_cast<double>(pools.within.size()) * static_cast<double>(pools.cross.size());
  return static_cast<double>(credit) / (2.0 * pairs);
}

PoolSummary summarize_pools(const ScorePools& pools) {
  if (pools.within.size() < 2 || pools.cross.size() < 2)
    throw ArgumentError("pool summaries need at least two values per pool");
  check_finite(pools.within, "within pool");
  check_finite(pools.cross, "cross pool");
  PoolSummary out;
  out.mean_within = mean_of(pools.within);
  out.sd_within = population_sd(pools.within);
  out.mean_cross = mean_of(pools.cross);
  out.sd_cross = population_sd(pools.cross);

  const auto [wlo, whi] = std::minmax_element(pools.within.begin(), pools.within.end());
  const auto [clo, chi] = std::minmax_element(pools.cross.begin(), pools.cross.end());
  const double lo = std::min(*wlo, *clo);
  const double hi = std::max(*whi, *chi);
  if (hi > lo) out.delta_norm = ((out.mean_within - lo) - (out.mean_cross - lo)) / (hi - lo);
  return out;
}

}  // namespace masc
