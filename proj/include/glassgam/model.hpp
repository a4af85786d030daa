#pragma once

// The fitted additive model. Scores decompose exactly: link-scale score is
// the intercept plus one looked-up value per shape function plus one per
// interaction surface. Shapes are centered at train time (weighted mean zero
// under training counts) so the intercept carries the base rate.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glassgam/binning.hpp"
#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"

namespace glassgam {

enum class LinkFunction { logistic, identity };

struct ShapeFunction {
  std::string feature;
  FeatureBins bins;             // grid plus per-bin training counts
  std::vector<double> values;   // link-scale contribution per bin
  std::vector<double> stderrs;  // across-outer-bag standard deviation per bin
};

// Pairwise correction on a coarsened grid. cell_of_bin_* maps each fine bin
// of the underlying feature to its coarse cell; values is row-major
// [cell_a][cell_b].
struct InteractionSurface {
  std::string feature_a;
  std::string feature_b;
  std::vector<std::uint16_t> cell_of_bin_a;
  std::vector<std::uint16_t> cell_of_bin_b;
  std::size_t n_cells_a = 0;
  std::size_t n_cells_b = 0;
  std::vector<double> values;
  std::vector<std::int64_t> cell_counts;  // training occupancy, same layout

  double value_at(std::uint16_t bin_a, std::uint16_t bin_b) const {
    return values[cell_of_bin_a[bin_a] * n_cells_b + cell_of_bin_b[bin_b]];
  }
};

struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::vector<std::string> notes;
};

struct AdditiveModel {
  double intercept = 0.0;
  std::vector<ShapeFunction> shapes;
  std::vector<InteractionSurface> interactions;
  LinkFunction link = LinkFunction::logistic;
  BinMap binmap;
  ModelMetadata metadata;

  std::size_t shape_index(std::string_view feature) const {
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (shapes[i].feature == feature) return i;
    }
    throw SchemaError("model has no shape for feature '" + std::string(feature) + "'");
  }
};

// ---------------------------------------------------------------------------
// Scoring

// `bins` holds one bin index per model shape, in model shape order.
inline double score_bins(const AdditiveModel& m, std::span<const std::uint16_t> bins) {
  if (bins.size() != m.shapes.size()) {
    throw ValueError("score_bins: expected " + std::to_string(m.shapes.size()) +
                     " bin indices, got " + std::to_string(bins.size()));
  }
  double s = m.intercept;
  for (std::size_t f = 0; f < m.shapes.size(); ++f) {
    s += m.shapes[f].values[bins[f]];
  }
  for (const auto& inter : m.interactions) {
    const std::size_t a = m.shape_index(inter.feature_a);
    const std::size_t b = m.shape_index(inter.feature_b);
    s += inter.value_at(bins[a], bins[b]);
  }
  return s;
}

// Scores a dataset already discretized under the model's bin map. The binned
// columns must be in model shape order (discretize() against m.binmap
// guarantees this).
inline std::vector<double> score_all(const AdditiveModel& m, const BinnedDataset& bd) {
  if (bd.columns.size() != m.shapes.size()) {
    throw SchemaError("score_all: binned dataset does not match the model's feature set");
  }
  std::vector<double> scores(bd.n_rows, m.intercept);
  for (std::size_t f = 0; f < m.shapes.size(); ++f) {
    const auto& vals = m.shapes[f].values;
    const auto& col = bd.columns[f];
    for (std::size_t r = 0; r < bd.n_rows; ++r) scores[r] += vals[col[r]];
  }
  for (const auto& inter : m.interactions) {
    const std::size_t a = m.shape_index(inter.feature_a);
    const std::size_t b = m.shape_index(inter.feature_b);
    const auto& ca = bd.columns[a];
    const auto& cb = bd.columns[b];
    for (std::size_t r = 0; r < bd.n_rows; ++r) {
      scores[r] += inter.value_at(ca[r], cb[r]);
    }
  }
  return scores;
}

// Scores one raw row given as feature -> cell text. Continuous features must
// be present and numeric (there is no sentinel bin to absorb them);
// categorical features fall back to the sentinel bin when the key is absent
// or the category is unknown.
inline double score_row(const AdditiveModel& m,
                        const std::map<std::string, std::string>& row) {
  std::vector<std::uint16_t> bins(m.shapes.size());
  for (std::size_t f = 0; f < m.shapes.size(); ++f) {
    const auto& fb = m.shapes[f].bins;
    const auto it = row.find(fb.feature);
    if (fb.kind == ColumnKind::continuous) {
      if (it == row.end() || trim(it->second).empty()) {
        throw ValueError("score_row: continuous feature '" + fb.feature +
                         "' absent and has no sentinel bin");
      }
      bins[f] = static_cast<std::uint16_t>(bin_of(fb, parse_double(it->second)));
    } else {
      bins[f] = static_cast<std::uint16_t>(
          it == row.end() ? fb.sentinel_bin() : bin_of(fb, std::string_view(it->second)));
    }
  }
  return score_bins(m, bins);
}

// Maps a raw score through the model's link: probability under logistic,
// the score itself under identity.
inline double apply_link(const AdditiveModel& m, double score) {
  return m.link == LinkFunction::logistic ? sigmoid(score) : score;
}

inline double predict_proba(const AdditiveModel& m,
                            const std::map<std::string, std::string>& row) {
  if (m.link != LinkFunction::logistic) {
    throw ValueError("predict_proba requires the logistic link");
  }
  return apply_link(m, score_row(m, row));
}

inline std::vector<double> predict_proba_all(const AdditiveModel& m, const BinnedDataset& bd) {
  if (m.link != LinkFunction::logistic) {
    throw ValueError("predict_proba requires the logistic link");
  }
  auto scores = score_all(m, bd);
  for (double& s : scores) s = sigmoid(s);
  return scores;
}

// ---------------------------------------------------------------------------
// Importance and editing

struct ImportanceEntry {
  std::string name;  // feature, or "a x b" for an interaction
  double importance = 0.0;
  bool is_interaction = false;
};

// Mean absolute link-scale contribution over the given dataset, sorted
// descending; ties keep model order, so an identically-zero shape ranks last
// among zeros.
inline std::vector<ImportanceEntry> feature_importance(const AdditiveModel& m,
                                                       const Dataset& d) {
  if (d.n_rows == 0) throw ValueError("feature_importance: dataset has no rows");
  const BinnedDataset bd = discretize(d, m.binmap);
  std::vector<ImportanceEntry> entries;
  entries.reserve(m.shapes.size() + m.interactions.size());
  for (std::size_t f = 0; f < m.shapes.size(); ++f) {
    double acc = 0.0;
    for (const auto bin : bd.columns[f]) acc += std::abs(m.shapes[f].values[bin]);
    entries.push_back({m.shapes[f].feature, acc / static_cast<double>(bd.n_rows), false});
  }
  for (const auto& inter : m.interactions) {
    const std::size_t a = m.shape_index(inter.feature_a);
    const std::size_t b = m.shape_index(inter.feature_b);
    double acc = 0.0;
    for (std::size_t r = 0; r < bd.n_rows; ++r) {
      acc += std::abs(inter.value_at(bd.columns[a][r], bd.columns[b][r]));
    }
    entries.push_back(
        {inter.feature_a + " x " + inter.feature_b, acc / static_cast<double>(bd.n_rows), true});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ImportanceEntry& x, const ImportanceEntry& y) {
                     return x.importance > y.importance;
                   });
  return entries;
}

// Editing hook: flattens one feature's contribution to exactly zero,
// including any interaction surface the feature participates in. Everything
// else is untouched, so predictions move by exactly the removed per-row
// contribution.
inline AdditiveModel zero_out_feature(const AdditiveModel& m, std::string_view feature) {
  AdditiveModel out = m;
  auto& shape = out.shapes[out.shape_index(feature)];
  std::fill(shape.values.begin(), shape.values.end(), 0.0);
  std::fill(shape.stderrs.begin(), shape.stderrs.end(), 0.0);
  for (auto& inter : out.interactions) {
    if (inter.feature_a == feature || inter.feature_b == feature) {
      std::fill(inter.values.begin(), inter.values.end(), 0.0);
    }
  }
  return out;
}

}  // namespace glassgam
