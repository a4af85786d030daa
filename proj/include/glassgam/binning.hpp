#pragma once

// Equal-frequency binning shared by every model trained on a dataset. Bins are
// computed once, before any bagging, so all outer bags and any later scoring
// see the same grid.
//
// Continuous bins are half-open: value v lands in the first bin whose upper
// cut is >= v (lower-exclusive, upper-inclusive). Values beyond the observed
// range clamp to the edge bins. Categorical features get one bin per known
// category plus a sentinel bin that absorbs categories never seen at build
// time; when imputation materialized a missing-category, that category's bin
// doubles as the sentinel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"

namespace glassgam {

struct FeatureBins {
  std::string feature;
  ColumnKind kind = ColumnKind::continuous;

  // Continuous grid
  std::vector<double> cuts;  // strictly increasing interior boundaries
  double value_min = 0.0;    // observed range at build time
  double value_max = 0.0;

  // Categorical grid; size equals n_bins(), sentinel is always last
  std::vector<std::string> category_labels;

  std::vector<std::int64_t> counts;  // per-bin occupancy of the build dataset

  int n_bins() const {
    return kind == ColumnKind::continuous ? static_cast<int>(cuts.size()) + 1
                                          : static_cast<int>(category_labels.size());
  }

  int sentinel_bin() const {
    if (kind != ColumnKind::categorical) {
      throw ValueError("sentinel_bin: feature '" + feature + "' is continuous");
    }
    return n_bins() - 1;
  }
};

struct BinMap {
  std::vector<FeatureBins> features;

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i].feature == name) return i;
    }
    throw SchemaError("binmap has no feature '" + std::string(name) + "'");
  }
};

inline int bin_of(const FeatureBins& fb, double v) {
  if (fb.kind != ColumnKind::continuous) {
    throw ValueError("bin_of(double): feature '" + fb.feature + "' is categorical");
  }
  if (std::isnan(v)) {
    throw ValueError("bin_of: missing value for continuous feature '" + fb.feature + "'");
  }
  // First bin whose upper cut admits v; v == cut goes to the lower bin.
  const auto it = std::lower_bound(fb.cuts.begin(), fb.cuts.end(), v);
  return static_cast<int>(it - fb.cuts.begin());
}

inline int bin_of(const FeatureBins& fb, std::string_view category) {
  if (fb.kind != ColumnKind::categorical) {
    throw ValueError("bin_of(label): feature '" + fb.feature + "' is continuous");
  }
  for (std::size_t b = 0; b < fb.category_labels.size(); ++b) {
    if (fb.category_labels[b] == category) return static_cast<int>(b);
  }
  return fb.sentinel_bin();
}

// Builds the shared grid from an imputed dataset. Continuous cut candidates
// sit at quantiles k/max_bins; duplicates collapse, so heavy ties yield fewer
// bins. A constant column produces a single bin.
inline BinMap build_bins(const Dataset& d, int max_bins = 256) {
  if (max_bins < 2) throw ValueError("build_bins: max_bins must be at least 2");
  if (max_bins > 65535) throw ValueError("build_bins: max_bins exceeds the bin index range");
  if (d.n_rows == 0) throw ValueError("build_bins: dataset has no rows");
  if (has_missing(d)) throw ValueError("build_bins requires an imputed dataset");

  BinMap bm;
  bm.features.reserve(d.schema.size());
  for (std::size_t f = 0; f < d.schema.size(); ++f) {
    FeatureBins fb;
    fb.feature = d.schema[f].name;
    fb.kind = d.schema[f].kind;
    if (fb.kind == ColumnKind::continuous) {
      const auto& col = d.continuous_col(f);
      std::vector<double> sorted(col);
      std::sort(sorted.begin(), sorted.end());
      fb.value_min = sorted.front();
      fb.value_max = sorted.back();
      for (int k = 1; k < max_bins; ++k) {
        const double cut =
            sorted_quantile(sorted, static_cast<double>(k) / static_cast<double>(max_bins));
        if ((fb.cuts.empty() || cut > fb.cuts.back()) && cut < fb.value_max) {
          fb.cuts.push_back(cut);
        }
      }
      fb.counts.assign(fb.n_bins(), 0);
      for (const double v : col) ++fb.counts[bin_of(fb, v)];
    } else {
      const auto& col = d.categorical_col(f);
      fb.category_labels = col.labels;
      const bool sentinel_materialized =
          col.sentinel_code >= 0 &&
          col.sentinel_code == static_cast<std::int32_t>(col.labels.size()) - 1;
      if (!sentinel_materialized) {
        fb.category_labels.push_back(detail::unique_sentinel_label(col.labels));
      }
      fb.counts.assign(fb.n_bins(), 0);
      for (const std::int32_t c : col.codes) {
        if (c == kMissingCode) throw ValueError("build_bins requires an imputed dataset");
        ++fb.counts[c];
      }
    }
    bm.features.push_back(std::move(fb));
  }
  return bm;
}

// ---------------------------------------------------------------------------
// Discretized view

struct BinnedDataset {
  BinMap binmap;
  std::vector<std::vector<std::uint16_t>> columns;  // [feature][row] -> bin
  std::vector<int> labels;
  std::size_t n_rows = 0;
};

// Maps a dataset onto an existing grid. Features are matched by name, and
// categorical codes are translated through labels, so a dataset with its own
// vocabulary (for example a test split loaded separately) bins correctly.
// Unseen categories land in the sentinel bin.
inline BinnedDataset discretize(const Dataset& d, const BinMap& bm) {
  BinnedDataset out;
  out.binmap = bm;
  out.labels = d.labels;
  out.n_rows = d.n_rows;
  out.columns.reserve(bm.features.size());
  for (const auto& fb : bm.features) {
    const std::size_t f = d.col_index(fb.feature);
    if (d.schema[f].kind != fb.kind) {
      throw SchemaError("feature '" + fb.feature + "' kind differs from the bin map");
    }
    std::vector<std::uint16_t> bins;
    bins.reserve(d.n_rows);
    if (fb.kind == ColumnKind::continuous) {
      for (const double v : d.continuous_col(f)) {
        if (std::isnan(v)) {
          throw ValueError("discretize: missing value in continuous feature '" + fb.feature +
                           "'; impute first");
        }
        bins.push_back(static_cast<std::uint16_t>(bin_of(fb, v)));
      }
    } else {
      const auto& col = d.categorical_col(f);
      // code -> bin translation table, computed once per column
      std::vector<std::uint16_t> code_bin(col.labels.size());
      for (std::size_t c = 0; c < col.labels.size(); ++c) {
        code_bin[c] = static_cast<std::uint16_t>(bin_of(fb, col.labels[c]));
      }
      for (const std::int32_t c : col.codes) {
        if (c == kMissingCode) {
          throw ValueError("discretize: missing value in categorical feature '" + fb.feature +
                           "'; impute first");
        }
        bins.push_back(code_bin[c]);
      }
    }
    out.columns.push_back(std::move(bins));
  }
  return out;
}

}  // namespace glassgam
