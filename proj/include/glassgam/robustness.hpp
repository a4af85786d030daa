#pragma once

// Shape-function robustness under training-set subsampling. Models retrained
// on nested subsets rebuild their own bin grids, so shapes from different
// sizes live on different grids; comparing them as polylines with the
// discrete Frechet distance sidesteps any bin alignment. Categorical shapes
// compare by per-category RMSE instead, aligned by category label.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glassgam/binning.hpp"
#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"
#include "glassgam/frechet.hpp"
#include "glassgam/model.hpp"
#include "glassgam/train.hpp"

namespace glassgam {

enum class XScaling { unit_interval, raw };

// One vertex per bin at the bin's center; edge bins center between the
// observed extreme and the nearest cut. unit_interval maps x onto [0, 1]
// using ref_range (falling back to the shape's own observed range) so that
// models trained on subsets with slightly different ranges stay comparable.
inline Polyline shape_to_polyline(const ShapeFunction& s, XScaling scaling,
                                  std::optional<std::pair<double, double>> ref_range = {}) {
  if (s.bins.kind != ColumnKind::continuous) {
    throw ValueError("shape_to_polyline: feature '" + s.feature +
                     "' is categorical; use categorical_shape_rmse");
  }
  const auto& cuts = s.bins.cuts;
  const std::size_t B = s.values.size();
  Polyline line;
  line.points.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    double center;
    if (B == 1) {
      center = 0.5 * (s.bins.value_min + s.bins.value_max);
    } else if (b == 0) {
      center = 0.5 * (s.bins.value_min + cuts.front());
    } else if (b == B - 1) {
      center = 0.5 * (cuts.back() + s.bins.value_max);
    } else {
      center = 0.5 * (cuts[b - 1] + cuts[b]);
    }
    line.points.push_back({center, s.values[b]});
  }
  if (scaling == XScaling::unit_interval) {
    const auto [lo, hi] = ref_range.value_or(std::pair{s.bins.value_min, s.bins.value_max});
    const double span = hi - lo;
    for (auto& p : line.points) {
      p.x = span > 0.0 ? (p.x - lo) / span : 0.5;
    }
  }
  return line;
}

// Root-mean-square difference over categories present (count > 0) in the
// reference shape. Categories align by label; a category the other model
// never saw reads from its sentinel bin.
inline double categorical_shape_rmse(const ShapeFunction& a, const ShapeFunction& ref) {
  if (a.bins.kind != ColumnKind::categorical || ref.bins.kind != ColumnKind::categorical) {
    throw ValueError("categorical_shape_rmse requires categorical shapes");
  }
  if (a.feature != ref.feature) {
    throw ValueError("categorical_shape_rmse: shapes describe different features ('" +
                     a.feature + "' vs '" + ref.feature + "')");
  }
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t b = 0; b < ref.values.size(); ++b) {
    if (ref.bins.counts[b] <= 0) continue;
    const int ab = bin_of(a.bins, std::string_view(ref.bins.category_labels[b]));
    const double d = a.values[static_cast<std::size_t>(ab)] - ref.values[b];
    acc += d * d;
    ++counted;
  }
  if (counted == 0) {
    throw ValueError("categorical_shape_rmse: reference shape has no occupied categories");
  }
  return std::sqrt(acc / static_cast<double>(counted));
}

// ---------------------------------------------------------------------------
// Subsampling sweep

struct SweepEntry {
  std::size_t size = 0;
  std::size_t positives = 0;
  bool degenerate = false;  // zero positives: not trained, no distance
  double distance = 0.0;
  ShapeFunction shape;  // snapshot for the evolution panel; empty when degenerate
};

struct FeatureSweep {
  std::string feature;
  bool is_continuous = true;
  ShapeFunction reference;
  std::vector<SweepEntry> entries;        // one per size, ascending
  std::vector<double> raw_distances;      // non-degenerate entries, size order
  std::vector<double> normalized;
  bool normalize_passthrough = false;
};

struct SweepResult {
  std::vector<std::size_t> sizes;
  std::vector<FeatureSweep> features;
};

struct NormalizedDistances {
  std::vector<double> values;
  bool passthrough = false;  // first raw distance was zero; values are raw
};

// Divides each distance by the first so curves from different features (and
// different raw scales) share an axis. A zero first distance flags the
// sequence and returns it unscaled.
inline NormalizedDistances normalize_distances(std::span<const double> raw) {
  NormalizedDistances out;
  out.values.assign(raw.begin(), raw.end());
  if (raw.empty()) return out;
  const double first = raw.front();
  if (first == 0.0) {
    out.passthrough = true;
    return out;
  }
  for (double& v : out.values) v /= first;
  return out;
}

struct SweepConfig {
  std::vector<std::size_t> sizes;       // ascending, last <= dataset rows
  std::vector<std::string> features;    // empty = every feature
  XScaling x_scaling = XScaling::unit_interval;
  std::uint64_t seed = 0;
};

namespace detail {

struct SweepPipeline {
  AdditiveModel model;
};

inline AdditiveModel sweep_train(const Dataset& d, const TrainConfig& cfg) {
  const BinMap bm = build_bins(d, cfg.max_bins);
  const BinnedDataset bd = discretize(d, bm);
  return train(bd, cfg).model;
}

}  // namespace detail

// Retrains the full pipeline (binning included) on nested random subsets and
// measures each subset's shapes against the full-data reference model. The
// training seed is held fixed across sizes, so a subset equal to the full
// dataset reproduces the reference exactly and its distance is 0. Subsets
// are drawn from per-size substreams of the sweep seed. A subset with zero
// positives is recorded as degenerate and skipped.
inline SweepResult run_sweep(const Dataset& d, const SweepConfig& sweep_cfg,
                             const TrainConfig& train_cfg) {
  if (sweep_cfg.sizes.empty()) throw ValueError("run_sweep: no sizes");
  for (std::size_t i = 1; i < sweep_cfg.sizes.size(); ++i) {
    if (sweep_cfg.sizes[i] <= sweep_cfg.sizes[i - 1]) {
      throw ValueError("run_sweep: sizes must be strictly ascending");
    }
  }
  if (sweep_cfg.sizes.back() > d.n_rows) {
    throw ValueError("run_sweep: largest size exceeds the dataset");
  }
  if (sweep_cfg.sizes.front() == 0) throw ValueError("run_sweep: sizes must be positive");

  std::vector<std::string> targets = sweep_cfg.features;
  if (targets.empty()) {
    for (const auto& sc : d.schema) targets.push_back(sc.name);
  }
  for (const auto& name : targets) d.col_index(name);  // validates

  const AdditiveModel reference = detail::sweep_train(d, train_cfg);

  SweepResult result;
  result.sizes = sweep_cfg.sizes;
  result.features.reserve(targets.size());
  for (const auto& name : targets) {
    FeatureSweep fs;
    fs.feature = name;
    fs.reference = reference.shapes[reference.shape_index(name)];
    fs.is_continuous = fs.reference.bins.kind == ColumnKind::continuous;
    result.features.push_back(std::move(fs));
  }

  for (std::size_t si = 0; si < sweep_cfg.sizes.size(); ++si) {
    const std::size_t size = sweep_cfg.sizes[si];
    Rng rng(derive_seed(sweep_cfg.seed, streams::subset, si));
    const auto rows = sample_without_replacement(rng, d.n_rows, size);
    const Dataset subset = take_rows(d, rows);
    std::size_t positives = 0;
    for (const int y : subset.labels) positives += static_cast<std::size_t>(y);

    if (positives == 0) {
      for (auto& fs : result.features) {
        SweepEntry entry;
        entry.size = size;
        entry.positives = 0;
        entry.degenerate = true;
        fs.entries.push_back(std::move(entry));
      }
      continue;
    }
    const AdditiveModel model = detail::sweep_train(subset, train_cfg);
    for (auto& fs : result.features) {
      SweepEntry entry;
      entry.size = size;
      entry.positives = positives;
      entry.shape = model.shapes[model.shape_index(fs.feature)];
      if (fs.is_continuous) {
        const auto ref_range =
            std::pair{fs.reference.bins.value_min, fs.reference.bins.value_max};
        entry.distance =
            discrete_frechet(shape_to_polyline(entry.shape, sweep_cfg.x_scaling, ref_range),
                             shape_to_polyline(fs.reference, sweep_cfg.x_scaling, ref_range));
      } else {
        entry.distance = categorical_shape_rmse(entry.shape, fs.reference);
      }
      fs.raw_distances.push_back(entry.distance);
      fs.entries.push_back(std::move(entry));
    }
  }
  for (auto& fs : result.features) {
    auto norm = normalize_distances(fs.raw_distances);
    fs.normalized = std::move(norm.values);
    fs.normalize_passthrough = norm.passthrough;
  }
  return result;
}

}  // namespace glassgam
