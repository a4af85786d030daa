#pragma once

// Cyclic gradient boosting of bin-level trees into an additive model.
//
// Training runs outer_bags independent replicates, each seeded from its own
// substream of the master seed, so the result is bit-identical for any thread
// count. Each bag: draw a validation slice, bootstrap a training multiset
// from the rest, then cycle over features fitting one shallow tree per
// feature per round on the current gradient residuals. Inner bags subsample
// rows per tree and the tree updates are averaged. After the main-effect
// stage, pair candidates are scored once on the pooled residuals of the
// merged main-effects model, and each bag boosts the selected pairs the same
// way. Per-bin values are averaged across bags (mean -> value, spread ->
// stderr), centered to weighted mean zero, and the means fold into the
// intercept.
//
// The single-feature tree is fit exactly: dynamic programming over contiguous
// bin segmentations maximizes the squared-error reduction subject to
// min_samples_leaf, which coincides with exhaustive search over split
// placements. Ties prefer fewer leaves, so constant residuals produce a
// single root leaf.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "glassgam/binning.hpp"
#include "glassgam/common.hpp"
#include "glassgam/metrics.hpp"
#include "glassgam/model.hpp"

namespace glassgam {

struct TrainConfig {
  double learning_rate = 0.01;
  int max_rounds = 5000;
  int outer_bags = 25;
  int inner_bags = 25;
  int min_samples_leaf = 25;
  int interactions = 10;
  int max_splits_per_tree = 2;
  int early_stop_patience = 50;
  double validation_fraction = 0.15;  // 0 disables the slice and early stopping
  double inner_sample_rate = 0.85;    // per-tree row subsample, without replacement
  bool outer_bootstrap = true;        // false trains every bag on the full slice
  int interaction_grid = 8;           // coarse cells per axis for pair surfaces
  int max_bins = 256;                 // consumed by the binning step of pipelines
  LinkFunction link = LinkFunction::logistic;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
      throw ConfigError("learning_rate must lie in (0, 1]");
    }
    if (max_rounds < 0) throw ConfigError("max_rounds must be non-negative");
    if (outer_bags < 1) throw ConfigError("outer_bags must be positive");
    if (inner_bags < 1) throw ConfigError("inner_bags must be positive");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be positive");
    if (interactions < 0) throw ConfigError("interactions must be non-negative");
    if (max_splits_per_tree < 1) throw ConfigError("max_splits_per_tree must be positive");
    if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("validation_fraction must lie in [0, 1)");
    }
    if (!(inner_sample_rate > 0.0 && inner_sample_rate <= 1.0)) {
      throw ConfigError("inner_sample_rate must lie in (0, 1]");
    }
    if (interaction_grid < 2) throw ConfigError("interaction_grid must be at least 2");
    if (max_bins < 2) throw ConfigError("max_bins must be at least 2");
    if (threads < 0) throw ConfigError("threads must be non-negative");
  }
};

inline std::string config_digest(const TrainConfig& c) {
  std::string s;
  s += fmt_double(c.learning_rate);
  for (const int v : {c.max_rounds, c.outer_bags, c.inner_bags, c.min_samples_leaf,
                      c.interactions, c.max_splits_per_tree, c.early_stop_patience,
                      c.interaction_grid, c.max_bins}) {
    s += '|';
    s += std::to_string(v);
  }
  s += '|';
  s += fmt_double(c.validation_fraction);
  s += '|';
  s += fmt_double(c.inner_sample_rate);
  s += c.outer_bootstrap ? "|boot" : "|full";
  s += c.link == LinkFunction::logistic ? "|logistic" : "|identity";
  s += '|';
  s += std::to_string(c.seed);
  return hex_digest(s);
}

// ---------------------------------------------------------------------------
// Single-feature tree

struct TreeFitConfig {
  int inner_bags = 1;
  double inner_sample_rate = 1.0;
  int max_splits = 2;
  int min_samples_leaf = 1;
};

namespace detail {

// Exact best contiguous segmentation of the per-bin histogram (W = weight,
// S = weighted residual sum) into at most max_segments parts, each of weight
// >= min_weight, maximizing sum of S^2/W. Ties go to fewer segments. Returns
// false when no single segment is feasible.
inline bool segment_fit(const std::vector<double>& W, const std::vector<double>& S,
                        int max_segments, double min_weight,
                        std::vector<double>& leaf_values) {
  const int B = static_cast<int>(W.size());
  std::vector<double> pre_w(B + 1, 0.0), pre_s(B + 1, 0.0);
  for (int b = 0; b < B; ++b) {
    pre_w[b + 1] = pre_w[b] + W[b];
    pre_s[b + 1] = pre_s[b] + S[b];
  }
  if (pre_w[B] < min_weight) return false;
  const int K = std::min(max_segments, B);
  constexpr double kNeg = -std::numeric_limits<double>::infinity();

  std::vector<double> prev(B + 1, kNeg), cur(B + 1, kNeg);
  std::vector<std::vector<std::uint32_t>> choice(
      K + 1, std::vector<std::uint32_t>(B + 1, 0));
  std::vector<double> best_at_end(K + 1, kNeg);

  for (int i = 1; i <= B; ++i) {
    if (pre_w[i] >= min_weight) {
      cur[i] = pre_s[i] * pre_s[i] / pre_w[i];
    }
  }
  best_at_end[1] = cur[B];
  for (int k = 2; k <= K; ++k) {
    prev.swap(cur);
    std::fill(cur.begin(), cur.end(), kNeg);
    for (int i = k; i <= B; ++i) {
      double best = kNeg;
      std::uint32_t arg = 0;
      for (int j = k - 1; j < i; ++j) {
        if (prev[j] == kNeg) continue;
        const double w = pre_w[i] - pre_w[j];
        if (w < min_weight) continue;
        const double s = pre_s[i] - pre_s[j];
        const double v = prev[j] + s * s / w;
        if (v > best) {
          best = v;
          arg = static_cast<std::uint32_t>(j);
        }
      }
      cur[i] = best;
      choice[k][i] = arg;
    }
    best_at_end[k] = cur[B];
  }

  double best = kNeg;
  int best_k = 1;
  for (int k = 1; k <= K; ++k) {
    if (best_at_end[k] > best) {
      best = best_at_end[k];
      best_k = k;
    }
  }
  leaf_values.assign(B, 0.0);
  int i = B;
  for (int k = best_k; k >= 1; --k) {
    const int j = static_cast<int>(choice[k][i]);
    const double w = pre_w[i] - pre_w[j];
    const double mean = (pre_s[i] - pre_s[j]) / w;
    for (int b = j; b < i; ++b) leaf_values[b] = mean;
    i = j;
  }
  return true;
}

inline std::vector<double> tree_core(std::span<const std::uint16_t> bins,
                                     std::span<const double> residuals,
                                     std::span<const double> weights, int n_bins,
                                     const TreeFitConfig& cfg, Rng& rng) {
  const std::size_t n = bins.size();
  std::vector<double> avg(static_cast<std::size_t>(n_bins), 0.0);
  if (n == 0) return avg;
  const bool weighted = !weights.empty();
  std::vector<double> W(static_cast<std::size_t>(n_bins)), S(static_cast<std::size_t>(n_bins));
  std::vector<double> leaf;
  const std::size_t m =
      cfg.inner_sample_rate >= 1.0
          ? n
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(cfg.inner_sample_rate *
                                                         static_cast<double>(n))));
  for (int ib = 0; ib < cfg.inner_bags; ++ib) {
    std::fill(W.begin(), W.end(), 0.0);
    std::fill(S.begin(), S.end(), 0.0);
    if (m == n) {
      for (std::size_t i = 0; i < n; ++i) {
        const double w = weighted ? weights[i] : 1.0;
        W[bins[i]] += w;
        S[bins[i]] += w * residuals[i];
      }
    } else {
      const auto idx = sample_without_replacement(rng, n, m);
      for (const auto i : idx) {
        const double w = weighted ? weights[i] : 1.0;
        W[bins[i]] += w;
        S[bins[i]] += w * residuals[i];
      }
    }
    if (segment_fit(W, S, cfg.max_splits + 1, cfg.min_samples_leaf, leaf)) {
      for (int b = 0; b < n_bins; ++b) avg[static_cast<std::size_t>(b)] += leaf[b];
    }
  }
  const double inv = 1.0 / static_cast<double>(cfg.inner_bags);
  for (double& v : avg) v *= inv;
  return avg;
}

}  // namespace detail

// Per-bin update for one boosting step on one feature. Each inner bag
// subsamples rows without replacement, fits the exact segmented tree, and the
// returned update is the across-inner-bag average of leaf means. An inner bag
// whose total weight falls below min_samples_leaf contributes a zero update.
inline std::vector<double> fit_feature_tree(std::span<const std::uint16_t> bins,
                                            std::span<const double> residuals,
                                            std::span<const double> weights, int n_bins,
                                            const TreeFitConfig& cfg, Rng& rng) {
  if (n_bins < 1) throw ValueError("fit_feature_tree: n_bins must be positive");
  if (bins.size() != residuals.size()) {
    throw ValueError("fit_feature_tree: bins and residuals differ in length");
  }
  if (!weights.empty() && weights.size() != bins.size()) {
    throw ValueError("fit_feature_tree: weights length mismatch");
  }
  for (const auto b : bins) {
    if (static_cast<int>(b) >= n_bins) {
      throw ValueError("fit_feature_tree: bin index out of range");
    }
  }
  if (cfg.inner_bags < 1 || cfg.min_samples_leaf < 1 || cfg.max_splits < 0 ||
      !(cfg.inner_sample_rate > 0.0 && cfg.inner_sample_rate <= 1.0)) {
    throw ConfigError("fit_feature_tree: invalid tree config");
  }
  return detail::tree_core(bins, residuals, weights, n_bins, cfg, rng);
}

// ---------------------------------------------------------------------------
// Pairwise interaction detection

struct AxisGrid {
  std::vector<std::uint16_t> cell_of_bin;
  std::size_t n_cells = 0;
};

// Coarsens a feature's bins into at most grid_cells contiguous groups of
// roughly equal training count. With few bins the grid is the identity.
inline AxisGrid build_axis_grid(const FeatureBins& fb, int grid_cells) {
  if (grid_cells < 2) throw ConfigError("build_axis_grid: grid_cells must be at least 2");
  AxisGrid g;
  const int B = fb.n_bins();
  g.cell_of_bin.resize(static_cast<std::size_t>(B));
  if (B <= grid_cells) {
    for (int b = 0; b < B; ++b) g.cell_of_bin[b] = static_cast<std::uint16_t>(b);
    g.n_cells = static_cast<std::size_t>(B);
    return g;
  }
  double total = 0.0;
  for (const auto c : fb.counts) total += static_cast<double>(c);
  int cell = 0;
  double cum = 0.0;
  for (int b = 0; b < B; ++b) {
    g.cell_of_bin[b] = static_cast<std::uint16_t>(cell);
    cum += static_cast<double>(fb.counts[b]);
    const double boundary = total * static_cast<double>(cell + 1) /
                            static_cast<double>(grid_cells);
    if (cum >= boundary && cell + 1 < grid_cells && b + 1 < B) ++cell;
  }
  g.n_cells = static_cast<std::size_t>(cell) + 1;
  return g;
}

struct InteractionCandidate {
  std::size_t feature_a = 0;
  std::size_t feature_b = 0;
  std::string name_a, name_b;
  double score = 0.0;
  AxisGrid grid_a, grid_b;
};

// Scores every feature pair by how much a joint piecewise-constant fit on the
// coarse grid reduces squared error beyond the two per-axis fits:
//
//   score = red(joint cells) - red(axis a) - red(axis b)
//
// where red(partition) = sum_g S_g^2/N_g - S^2/N over the given residuals.
// Returns the top_k highest-scoring pairs, ties broken by lexicographic
// feature-name order.
inline std::vector<InteractionCandidate> detect_interactions(const BinnedDataset& bd,
                                                             std::span<const double> residuals,
                                                             int top_k, int grid_cells = 8) {
  if (residuals.size() != bd.n_rows) {
    throw ValueError("detect_interactions: residuals length mismatch");
  }
  if (top_k < 0) throw ConfigError("detect_interactions: top_k must be non-negative");
  const std::size_t F = bd.binmap.features.size();
  std::vector<InteractionCandidate> out;
  if (top_k == 0 || F < 2 || bd.n_rows == 0) return out;

  std::vector<AxisGrid> grids(F);
  std::vector<std::vector<std::uint16_t>> cell_cols(F);
  for (std::size_t f = 0; f < F; ++f) {
    grids[f] = build_axis_grid(bd.binmap.features[f], grid_cells);
    auto& col = cell_cols[f];
    col.resize(bd.n_rows);
    const auto& bins = bd.columns[f];
    for (std::size_t r = 0; r < bd.n_rows; ++r) {
      col[r] = grids[f].cell_of_bin[bins[r]];
    }
  }

  const auto n = static_cast<double>(bd.n_rows);
  double s_tot = 0.0;
  for (const double r : residuals) s_tot += r;
  const double base = s_tot * s_tot / n;

  auto reduction = [&](const std::vector<double>& W, const std::vector<double>& S) {
    double acc = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
      if (W[i] > 0.0) acc += S[i] * S[i] / W[i];
    }
    return acc - base;
  };

  std::vector<double> red_axis(F, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    std::vector<double> W(grids[f].n_cells, 0.0), S(grids[f].n_cells, 0.0);
    const auto& col = cell_cols[f];
    for (std::size_t r = 0; r < bd.n_rows; ++r) {
      W[col[r]] += 1.0;
      S[col[r]] += residuals[r];
    }
    red_axis[f] = reduction(W, S);
  }

  for (std::size_t a = 0; a < F; ++a) {
    for (std::size_t b = a + 1; b < F; ++b) {
      const std::size_t nb = grids[b].n_cells;
      std::vector<double> W(grids[a].n_cells * nb, 0.0), S(grids[a].n_cells * nb, 0.0);
      const auto& ca = cell_cols[a];
      const auto& cb = cell_cols[b];
      for (std::size_t r = 0; r < bd.n_rows; ++r) {
        const std::size_t idx = static_cast<std::size_t>(ca[r]) * nb + cb[r];
        W[idx] += 1.0;
        S[idx] += residuals[r];
      }
      InteractionCandidate cand;
      cand.feature_a = a;
      cand.feature_b = b;
      cand.name_a = bd.binmap.features[a].feature;
      cand.name_b = bd.binmap.features[b].feature;
      cand.score = reduction(W, S) - red_axis[a] - red_axis[b];
      cand.grid_a = grids[a];
      cand.grid_b = grids[b];
      out.push_back(std::move(cand));
    }
  }
  std::sort(out.begin(), out.end(), [](const InteractionCandidate& x,
                                       const InteractionCandidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.name_a != y.name_a) return x.name_a < y.name_a;
    return x.name_b < y.name_b;
  });
  if (out.size() > static_cast<std::size_t>(top_k)) {
    out.resize(static_cast<std::size_t>(top_k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Outer-bag merge

struct MergedBins {
  std::vector<double> values;   // across-bag mean
  std::vector<double> stderrs;  // across-bag population standard deviation
};

inline MergedBins merge_outer_bags(const std::vector<std::vector<double>>& per_bag) {
  if (per_bag.empty()) throw ValueError("merge_outer_bags: no bags");
  const std::size_t B = per_bag[0].size();
  for (const auto& bag : per_bag) {
    if (bag.size() != B) throw ValueError("merge_outer_bags: bag size mismatch");
  }
  MergedBins out;
  out.values.assign(B, 0.0);
  out.stderrs.assign(B, 0.0);
  const double inv = 1.0 / static_cast<double>(per_bag.size());
  for (const auto& bag : per_bag) {
    for (std::size_t b = 0; b < B; ++b) out.values[b] += bag[b];
  }
  for (double& v : out.values) v *= inv;
  if (per_bag.size() > 1) {
    for (const auto& bag : per_bag) {
      for (std::size_t b = 0; b < B; ++b) {
        const double d = bag[b] - out.values[b];
        out.stderrs[b] += d * d;
      }
    }
    for (double& v : out.stderrs) v = std::sqrt(v * inv);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trainer

struct BagHistory {
  int bag = 0;
  double intercept = 0.0;
  bool intercept_clamped = false;
  int main_rounds = 0;
  int pair_rounds = 0;
  std::vector<double> train_loss;  // one entry per completed round, both stages
  std::vector<double> val_loss;    // empty when validation_fraction == 0
};

struct TrainResult {
  AdditiveModel model;
  std::vector<BagHistory> bags;
  std::vector<InteractionCandidate> detection;  // selected pairs, best first
  std::vector<std::string> notes;
};

namespace detail {

struct BagContext {
  std::uint64_t rng_seed = 0;
  std::vector<std::uint32_t> val_rows;
  std::vector<std::uint32_t> entries;
  std::vector<std::vector<std::uint16_t>> fbins;  // [feature][entry]
  std::vector<std::vector<std::uint16_t>> vbins;  // [feature][val row]
  std::vector<double> y_entries, y_val;
  std::vector<double> scores, vscores;
  std::vector<std::vector<double>> main_acc;  // [feature][bin]
  std::vector<std::vector<double>> pair_acc;  // [pair][cell]
  BagHistory history;
};

inline double stage_loss(LinkFunction link, std::span<const double> y,
                         std::span<const double> scores) {
  double acc = 0.0;
  if (link == LinkFunction::logistic) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double p = std::clamp(sigmoid(scores[i]), 1e-15, 1.0 - 1e-15);
      acc -= y[i] > 0.5 ? std::log(p) : std::log(1.0 - p);
    }
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - scores[i];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(y.size());
}

inline void compute_residuals(LinkFunction link, std::span<const double> y,
                              std::span<const double> scores, std::vector<double>& out) {
  out.resize(y.size());
  if (link == LinkFunction::logistic) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - sigmoid(scores[i]);
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - scores[i];
  }
}

// Greedy axis-aligned rectangle tree on the coarse cell grid; values are leaf
// means. Gains must clear a relative epsilon so constant residuals never
// split on rounding noise.
inline std::vector<double> fit_pair_cells(const std::vector<double>& W,
                                          const std::vector<double>& S, std::size_t na,
                                          std::size_t nb, int max_splits, double min_weight) {
  struct Rect {
    std::size_t a0, a1, b0, b1;
  };
  std::vector<double> values(na * nb, 0.0);
  auto sums = [&](const Rect& r) {
    double w = 0.0, s = 0.0;
    for (std::size_t a = r.a0; a < r.a1; ++a) {
      for (std::size_t b = r.b0; b < r.b1; ++b) {
        w += W[a * nb + b];
        s += S[a * nb + b];
      }
    }
    return std::pair<double, double>{w, s};
  };
  std::vector<Rect> leaves{{0, na, 0, nb}};
  const auto [w_root, s_root] = sums(leaves[0]);
  if (w_root < min_weight) return values;

  for (int split = 0; split < max_splits; ++split) {
    double best_gain = 0.0;
    std::size_t best_leaf = 0;
    bool best_on_a = true, found = false;
    std::size_t best_pos = 0;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
      const Rect& r = leaves[li];
      const auto [wp, sp] = sums(r);
      if (wp < 2.0 * min_weight) continue;
      const double parent = sp * sp / wp;
      const double min_gain = 1e-12 * std::max(1.0, std::abs(parent));
      for (int axis = 0; axis < 2; ++axis) {
        const std::size_t lo = axis == 0 ? r.a0 : r.b0;
        const std::size_t hi = axis == 0 ? r.a1 : r.b1;
        double wl = 0.0, sl = 0.0;
        for (std::size_t pos = lo + 1; pos < hi; ++pos) {
          // accumulate the slice that moved to the left side
          for (std::size_t other = (axis == 0 ? r.b0 : r.a0);
               other < (axis == 0 ? r.b1 : r.a1); ++other) {
            const std::size_t idx =
                axis == 0 ? (pos - 1) * nb + other : other * nb + (pos - 1);
            wl += W[idx];
            sl += S[idx];
          }
          const double wr = wp - wl, sr = sp - sl;
          if (wl < min_weight || wr < min_weight) continue;
          const double gain = sl * sl / wl + sr * sr / wr - parent;
          if (gain > min_gain && gain > best_gain) {
            best_gain = gain;
            best_leaf = li;
            best_on_a = axis == 0;
            best_pos = pos;
            found = true;
          }
        }
      }
    }
    if (!found) break;
    const Rect r = leaves[best_leaf];
    Rect left = r, right = r;
    if (best_on_a) {
      left.a1 = best_pos;
      right.a0 = best_pos;
    } else {
      left.b1 = best_pos;
      right.b0 = best_pos;
    }
    leaves[best_leaf] = left;
    leaves.push_back(right);
  }
  for (const Rect& r : leaves) {
    const auto [w, s] = sums(r);
    const double v = w > 0.0 ? s / w : 0.0;
    for (std::size_t a = r.a0; a < r.a1; ++a) {
      for (std::size_t b = r.b0; b < r.b1; ++b) values[a * nb + b] = v;
    }
  }
  return values;
}

inline std::vector<double> fit_pair_tree(std::span<const std::uint16_t> cells,
                                         std::span<const double> residuals, std::size_t na,
                                         std::size_t nb, const TreeFitConfig& cfg, Rng& rng) {
  const std::size_t n = cells.size();
  std::vector<double> avg(na * nb, 0.0);
  if (n == 0) return avg;
  std::vector<double> W(na * nb), S(na * nb);
  const std::size_t m =
      cfg.inner_sample_rate >= 1.0
          ? n
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(cfg.inner_sample_rate *
                                                         static_cast<double>(n))));
  for (int ib = 0; ib < cfg.inner_bags; ++ib) {
    std::fill(W.begin(), W.end(), 0.0);
    std::fill(S.begin(), S.end(), 0.0);
    if (m == n) {
      for (std::size_t i = 0; i < n; ++i) {
        W[cells[i]] += 1.0;
        S[cells[i]] += residuals[i];
      }
    } else {
      const auto idx = sample_without_replacement(rng, n, m);
      for (const auto i : idx) {
        W[cells[i]] += 1.0;
        S[cells[i]] += residuals[i];
      }
    }
    const auto fit = fit_pair_cells(W, S, na, nb, cfg.max_splits, cfg.min_samples_leaf);
    for (std::size_t c = 0; c < avg.size(); ++c) avg[c] += fit[c];
  }
  const double inv = 1.0 / static_cast<double>(cfg.inner_bags);
  for (double& v : avg) v *= inv;
  return avg;
}

}  // namespace detail

// Trains an additive model on a pre-binned dataset. See the header comment
// for the staging; notes collect non-fatal conditions (clamped intercepts,
// skipped features, single-class labels).
inline TrainResult train(const BinnedDataset& bd, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = bd.n_rows;
  const std::size_t F = bd.binmap.features.size();
  if (n == 0) throw ValueError("train: dataset has no rows");
  if (F == 0) throw ValueError("train: dataset has no features");
  if (bd.labels.size() != n) throw ValueError("train: labels length mismatch");
  std::size_t n_pos = 0;
  for (const int y : bd.labels) {
    if (y != 0 && y != 1) throw ValueError("train: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(y);
  }

  TrainResult result;
  if (n_pos == 0 || n_pos == n) {
    result.notes.push_back("labels are single-class; the model reduces to a clamped intercept");
  }

  std::vector<bool> skip(F, false);
  for (std::size_t f = 0; f < F; ++f) {
    int occupied = 0;
    for (const auto c : bd.binmap.features[f].counts) occupied += c > 0 ? 1 : 0;
    if (occupied <= 1) {
      skip[f] = true;
      result.notes.push_back("feature '" + bd.binmap.features[f].feature +
                             "' has a single occupied bin; skipped during boosting");
    }
  }

  const TreeFitConfig tree_cfg{cfg.inner_bags, cfg.inner_sample_rate, cfg.max_splits_per_tree,
                               cfg.min_samples_leaf};
  const auto n_bags = static_cast<std::size_t>(cfg.outer_bags);
  std::vector<detail::BagContext> bags(n_bags);

  // Stage 1: independent main-effect boosting per bag.
  parallel_for(n_bags, cfg.threads, [&](std::size_t bi) {
    auto& ctx = bags[bi];
    ctx.history.bag = static_cast<int>(bi);
    ctx.rng_seed = derive_seed(cfg.seed, streams::outer_bag, bi);
    Rng rng(ctx.rng_seed);

    std::size_t n_val = 0;
    if (cfg.validation_fraction > 0.0) {
      n_val = std::min<std::size_t>(
          static_cast<std::size_t>(std::llround(cfg.validation_fraction *
                                                static_cast<double>(n))),
          n - 1);
      ctx.val_rows = sample_without_replacement(rng, n, n_val);
    }
    std::vector<std::uint32_t> pool;
    pool.reserve(n - n_val);
    {
      std::size_t vi = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (vi < ctx.val_rows.size() && ctx.val_rows[vi] == r) {
          ++vi;
        } else {
          pool.push_back(static_cast<std::uint32_t>(r));
        }
      }
    }
    if (cfg.outer_bootstrap) {
      ctx.entries.resize(pool.size());
      for (auto& e : ctx.entries) e = pool[rng.bounded(pool.size())];
    } else {
      ctx.entries = std::move(pool);
    }

    const std::size_t m = ctx.entries.size();
    ctx.y_entries.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      ctx.y_entries[k] = static_cast<double>(bd.labels[ctx.entries[k]]);
    }
    ctx.y_val.resize(ctx.val_rows.size());
    for (std::size_t k = 0; k < ctx.val_rows.size(); ++k) {
      ctx.y_val[k] = static_cast<double>(bd.labels[ctx.val_rows[k]]);
    }

    double rate = 0.0;
    for (const double y : ctx.y_entries) rate += y;
    rate /= static_cast<double>(m);
    if (cfg.link == LinkFunction::logistic) {
      const double lo = 1.0 / (static_cast<double>(m) + 2.0);
      const double clamped = std::clamp(rate, lo, 1.0 - lo);
      ctx.history.intercept_clamped = clamped != rate;
      ctx.history.intercept = logit(clamped);
    } else {
      ctx.history.intercept = rate;
    }
    ctx.scores.assign(m, ctx.history.intercept);
    ctx.vscores.assign(ctx.val_rows.size(), ctx.history.intercept);

    ctx.fbins.resize(F);
    ctx.vbins.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
      if (skip[f]) continue;
      ctx.fbins[f].resize(m);
      const auto& col = bd.columns[f];
      for (std::size_t k = 0; k < m; ++k) ctx.fbins[f][k] = col[ctx.entries[k]];
      ctx.vbins[f].resize(ctx.val_rows.size());
      for (std::size_t k = 0; k < ctx.val_rows.size(); ++k) {
        ctx.vbins[f][k] = col[ctx.val_rows[k]];
      }
    }
    ctx.main_acc.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
      ctx.main_acc[f].assign(static_cast<std::size_t>(bd.binmap.features[f].n_bins()), 0.0);
    }

    std::vector<double> residuals;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int round = 0; round < cfg.max_rounds; ++round) {
      for (std::size_t f = 0; f < F; ++f) {
        if (skip[f]) continue;
        detail::compute_residuals(cfg.link, ctx.y_entries, ctx.scores, residuals);
        const auto update = detail::tree_core(
            ctx.fbins[f], residuals, {}, bd.binmap.features[f].n_bins(), tree_cfg, rng);
        auto& acc = ctx.main_acc[f];
        for (std::size_t b = 0; b < update.size(); ++b) {
          acc[b] += cfg.learning_rate * update[b];
        }
        for (std::size_t k = 0; k < m; ++k) {
          ctx.scores[k] += cfg.learning_rate * update[ctx.fbins[f][k]];
        }
        for (std::size_t k = 0; k < ctx.vscores.size(); ++k) {
          ctx.vscores[k] += cfg.learning_rate * update[ctx.vbins[f][k]];
        }
      }
      ctx.history.main_rounds = round + 1;
      ctx.history.train_loss.push_back(detail::stage_loss(cfg.link, ctx.y_entries, ctx.scores));
      if (!ctx.val_rows.empty()) {
        const double vl = detail::stage_loss(cfg.link, ctx.y_val, ctx.vscores);
        ctx.history.val_loss.push_back(vl);
        if (vl < best_val) {
          best_val = vl;
          since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
          break;
        }
      }
    }
    // Stage 2 reseeds from a draw of this generator, continuing the bag's
    // stream without carrying the engine object across phases.
    ctx.rng_seed = rng.next_u64();
  });

  // Interaction detection on pooled residuals of the merged main effects.
  std::vector<InteractionCandidate> selected;
  if (cfg.interactions > 0 && F >= 2) {
    std::vector<std::vector<double>> mean_acc(F);
    for (std::size_t f = 0; f < F; ++f) {
      mean_acc[f].assign(static_cast<std::size_t>(bd.binmap.features[f].n_bins()), 0.0);
      for (const auto& ctx : bags) {
        for (std::size_t b = 0; b < mean_acc[f].size(); ++b) {
          mean_acc[f][b] += ctx.main_acc[f][b];
        }
      }
      for (double& v : mean_acc[f]) v /= static_cast<double>(n_bags);
    }
    double mean_intercept = 0.0;
    for (const auto& ctx : bags) mean_intercept += ctx.history.intercept;
    mean_intercept /= static_cast<double>(n_bags);

    std::vector<double> pooled(n, mean_intercept);
    for (std::size_t f = 0; f < F; ++f) {
      const auto& col = bd.columns[f];
      for (std::size_t r = 0; r < n; ++r) pooled[r] += mean_acc[f][col[r]];
    }
    std::vector<double> resid(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double p = cfg.link == LinkFunction::logistic ? sigmoid(pooled[r]) : pooled[r];
      resid[r] = static_cast<double>(bd.labels[r]) - p;
    }
    selected = detect_interactions(bd, resid, cfg.interactions, cfg.interaction_grid);
  }

  // Stage 2: boost the selected pairs per bag.
  const std::size_t P = selected.size();
  if (P > 0) {
    parallel_for(n_bags, cfg.threads, [&](std::size_t bi) {
      auto& ctx = bags[bi];
      Rng rng(ctx.rng_seed);
      const std::size_t m = ctx.entries.size();
      std::vector<std::vector<std::uint16_t>> pcells(P), vpcells(P);
      ctx.pair_acc.resize(P);
      for (std::size_t p = 0; p < P; ++p) {
        const auto& cand = selected[p];
        const std::size_t nb_cells = cand.grid_b.n_cells;
        ctx.pair_acc[p].assign(cand.grid_a.n_cells * nb_cells, 0.0);
        pcells[p].resize(m);
        const auto& col_a = bd.columns[cand.feature_a];
        const auto& col_b = bd.columns[cand.feature_b];
        for (std::size_t k = 0; k < m; ++k) {
          const auto r = ctx.entries[k];
          pcells[p][k] = static_cast<std::uint16_t>(
              cand.grid_a.cell_of_bin[col_a[r]] * nb_cells + cand.grid_b.cell_of_bin[col_b[r]]);
        }
        vpcells[p].resize(ctx.val_rows.size());
        for (std::size_t k = 0; k < ctx.val_rows.size(); ++k) {
          const auto r = ctx.val_rows[k];
          vpcells[p][k] = static_cast<std::uint16_t>(
              cand.grid_a.cell_of_bin[col_a[r]] * nb_cells + cand.grid_b.cell_of_bin[col_b[r]]);
        }
      }
      std::vector<double> residuals;
      double best_val = std::numeric_limits<double>::infinity();
      int since_best = 0;
      for (int round = 0; round < cfg.max_rounds; ++round) {
        for (std::size_t p = 0; p < P; ++p) {
          detail::compute_residuals(cfg.link, ctx.y_entries, ctx.scores, residuals);
          const auto update =
              detail::fit_pair_tree(pcells[p], residuals, selected[p].grid_a.n_cells,
                                    selected[p].grid_b.n_cells, tree_cfg, rng);
          auto& acc = ctx.pair_acc[p];
          for (std::size_t c = 0; c < update.size(); ++c) {
            acc[c] += cfg.learning_rate * update[c];
          }
          for (std::size_t k = 0; k < m; ++k) {
            ctx.scores[k] += cfg.learning_rate * update[pcells[p][k]];
          }
          for (std::size_t k = 0; k < ctx.vscores.size(); ++k) {
            ctx.vscores[k] += cfg.learning_rate * update[vpcells[p][k]];
          }
        }
        ctx.history.pair_rounds = round + 1;
        ctx.history.train_loss.push_back(
            detail::stage_loss(cfg.link, ctx.y_entries, ctx.scores));
        if (!ctx.val_rows.empty()) {
          const double vl = detail::stage_loss(cfg.link, ctx.y_val, ctx.vscores);
          ctx.history.val_loss.push_back(vl);
          if (vl < best_val) {
            best_val = vl;
            since_best = 0;
          } else if (++since_best >= cfg.early_stop_patience) {
            break;
          }
        }
      }
    });
  }

  // Merge bags into the final model, then center every component.
  AdditiveModel model;
  model.link = cfg.link;
  model.binmap = bd.binmap;
  model.metadata.seed = cfg.seed;
  model.metadata.config_digest = config_digest(cfg);

  double intercept = 0.0;
  std::size_t clamped_bags = 0;
  for (const auto& ctx : bags) {
    intercept += ctx.history.intercept;
    clamped_bags += ctx.history.intercept_clamped ? 1 : 0;
  }
  intercept /= static_cast<double>(n_bags);
  if (clamped_bags > 0) {
    result.notes.push_back("intercept clamped in " + std::to_string(clamped_bags) +
                           " of " + std::to_string(n_bags) + " bags (degenerate base rate)");
  }

  model.shapes.reserve(F);
  std::vector<std::vector<double>> scratch(n_bags);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t bi = 0; bi < n_bags; ++bi) scratch[bi] = bags[bi].main_acc[f];
    MergedBins merged = merge_outer_bags(scratch);
    ShapeFunction shape;
    shape.feature = bd.binmap.features[f].feature;
    shape.bins = bd.binmap.features[f];
    shape.values = std::move(merged.values);
    shape.stderrs = std::move(merged.stderrs);
    double weighted = 0.0, total = 0.0;
    for (std::size_t b = 0; b < shape.values.size(); ++b) {
      weighted += shape.values[b] * static_cast<double>(shape.bins.counts[b]);
      total += static_cast<double>(shape.bins.counts[b]);
    }
    const double mean = weighted / total;
    for (double& v : shape.values) v -= mean;
    intercept += mean;
    model.shapes.push_back(std::move(shape));
  }

  for (std::size_t p = 0; p < P; ++p) {
    const auto& cand = selected[p];
    InteractionSurface surf;
    surf.feature_a = cand.name_a;
    surf.feature_b = cand.name_b;
    surf.cell_of_bin_a = cand.grid_a.cell_of_bin;
    surf.cell_of_bin_b = cand.grid_b.cell_of_bin;
    surf.n_cells_a = cand.grid_a.n_cells;
    surf.n_cells_b = cand.grid_b.n_cells;
    for (std::size_t bi = 0; bi < n_bags; ++bi) scratch[bi] = bags[bi].pair_acc[p];
    MergedBins merged = merge_outer_bags(scratch);
    surf.values = std::move(merged.values);
    surf.cell_counts.assign(surf.values.size(), 0);
    const auto& col_a = bd.columns[cand.feature_a];
    const auto& col_b = bd.columns[cand.feature_b];
    for (std::size_t r = 0; r < n; ++r) {
      ++surf.cell_counts[cand.grid_a.cell_of_bin[col_a[r]] * surf.n_cells_b +
                         cand.grid_b.cell_of_bin[col_b[r]]];
    }
    double weighted = 0.0;
    for (std::size_t c = 0; c < surf.values.size(); ++c) {
      weighted += surf.values[c] * static_cast<double>(surf.cell_counts[c]);
    }
    const double mean = weighted / static_cast<double>(n);
    for (double& v : surf.values) v -= mean;
    intercept += mean;
    model.interactions.push_back(std::move(surf));
  }

  model.intercept = intercept;
  result.model = std::move(model);
  result.detection = std::move(selected);
  result.bags.reserve(n_bags);
  for (auto& ctx : bags) result.bags.push_back(std::move(ctx.history));
  return result;
}

}  // namespace glassgam
