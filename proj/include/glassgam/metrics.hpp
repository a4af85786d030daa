#pragma once

// Discrimination and calibration metrics. auroc() uses the rank-sum form of
// the Mann-Whitney statistic with average ranks for ties, which equals the
// pair-counting definition (ties worth 1/2) exactly in double arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "glassgam/common.hpp"

namespace glassgam {

inline double auroc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ValueError("auroc: labels and scores differ in length");
  }
  const std::size_t n = labels.size();
  std::size_t n_pos = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) throw ValueError("auroc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValueError("auroc requires both classes to be present");
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });
  // Walk tie groups; each member gets the group's average rank (1-based).
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      pos_in_group += static_cast<std::size_t>(labels[order[j]]);
      ++j;
    }
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    rank_sum_pos += avg_rank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

// ---------------------------------------------------------------------------
// Bootstrap confidence interval

struct AurocCi {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;
  int resamples = 0;      // requested
  int skipped = 0;        // resamples dropped for being single-class
  std::uint64_t seed = 0;
};

// Percentile bootstrap over row resamples. Each resample draws its indices
// from an independent substream keyed by the resample number, so results do
// not depend on evaluation order. Single-class resamples are skipped and
// counted. The interval is widened to include the point estimate, keeping
// lower <= point <= upper part of the contract.
inline AurocCi bootstrap_auroc_ci(std::span<const int> labels, std::span<const double> scores,
                                  int resamples = 1000, double alpha = 0.05,
                                  std::uint64_t seed = 0) {
  if (labels.size() < 2) throw ValueError("bootstrap_auroc_ci: need at least two rows");
  if (resamples < 1) throw ValueError("bootstrap_auroc_ci: resamples must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValueError("bootstrap_auroc_ci: alpha must lie in (0, 1)");
  }
  AurocCi ci;
  ci.point = auroc(labels, scores);
  ci.alpha = alpha;
  ci.resamples = resamples;
  ci.seed = seed;

  const std::size_t n = labels.size();
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  std::vector<int> ys(n);
  std::vector<double> ss(n);
  for (int r = 0; r < resamples; ++r) {
    Rng rng(derive_seed(seed, streams::resample, static_cast<std::uint64_t>(r)));
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(rng.bounded(n));
      ys[i] = labels[idx];
      ss[i] = scores[idx];
      n_pos += static_cast<std::size_t>(ys[i]);
    }
    if (n_pos == 0 || n_pos == n) {
      ++ci.skipped;
      continue;
    }
    stats.push_back(auroc(ys, ss));
  }
  if (stats.empty()) {
    throw ValueError("bootstrap_auroc_ci: every resample was single-class");
  }
  std::sort(stats.begin(), stats.end());
  ci.lower = std::min(sorted_quantile(stats, alpha / 2.0), ci.point);
  ci.upper = std::max(sorted_quantile(stats, 1.0 - alpha / 2.0), ci.point);
  return ci;
}

// ---------------------------------------------------------------------------
// Calibration

enum class CalibrationBinning { uniform_width, equal_frequency };

struct CalibrationBin {
  int bin_index = 0;
  double mean_predicted = 0.0;
  double observed_rate = 0.0;
  std::size_t count = 0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;  // non-empty bins, ascending bin_index
  std::vector<int> empty_bins;
  int n_bins = 0;
  CalibrationBinning binning = CalibrationBinning::uniform_width;
};

inline CalibrationReport calibration_curve(std::span<const int> labels,
                                           std::span<const double> probs, int n_bins = 10,
                                           CalibrationBinning binning =
                                               CalibrationBinning::uniform_width) {
  if (labels.size() != probs.size()) {
    throw ValueError("calibration_curve: labels and probabilities differ in length");
  }
  if (n_bins < 2) throw ValueError("calibration_curve: n_bins must be at least 2");
  if (labels.empty()) throw ValueError("calibration_curve: no rows");
  for (const double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValueError("calibration_curve: probability outside [0, 1]");
    }
  }
  const std::size_t n = labels.size();
  std::vector<int> bin_of_row(n);
  if (binning == CalibrationBinning::uniform_width) {
    for (std::size_t i = 0; i < n; ++i) {
      bin_of_row[i] = std::min(static_cast<int>(probs[i] * n_bins), n_bins - 1);
    }
  } else {
    // Equal-count chunks of the probability order; ties broken by row index
    // so the assignment is deterministic.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return probs[a] < probs[b];
    });
    const std::size_t base = n / static_cast<std::size_t>(n_bins);
    const std::size_t extra = n % static_cast<std::size_t>(n_bins);
    std::size_t at = 0;
    for (int b = 0; b < n_bins; ++b) {
      const std::size_t take = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
      for (std::size_t k = 0; k < take; ++k) bin_of_row[order[at++]] = b;
    }
  }
  std::vector<double> sum_p(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> sum_y(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = static_cast<std::size_t>(bin_of_row[i]);
    sum_p[b] += probs[i];
    sum_y[b] += static_cast<double>(labels[i]);
    ++count[b];
  }
  CalibrationReport report;
  report.n_bins = n_bins;
  report.binning = binning;
  for (int b = 0; b < n_bins; ++b) {
    const auto bu = static_cast<std::size_t>(b);
    if (count[bu] == 0) {
      report.empty_bins.push_back(b);
      continue;
    }
    report.bins.push_back({b, sum_p[bu] / static_cast<double>(count[bu]),
                           sum_y[bu] / static_cast<double>(count[bu]), count[bu]});
  }
  return report;
}

// Mean negative log-likelihood with probabilities clamped to
// [1e-15, 1 - 1e-15] to keep the result finite.
inline double log_loss(std::span<const int> labels, std::span<const double> probs) {
  if (labels.size() != probs.size()) {
    throw ValueError("log_loss: labels and probabilities differ in length");
  }
  if (labels.empty()) throw ValueError("log_loss: no rows");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
    acc -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return acc / static_cast<double>(labels.size());
}

}  // namespace glassgam
