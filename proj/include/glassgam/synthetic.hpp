#pragma once

// Synthetic binary-outcome generator with known additive structure. Each row
// draws its features from its own seed substream (keyed by row index), the
// true log-odds score is intercept + sum of per-feature effects + an optional
// XOR-style pair term, and the label is Bernoulli(sigmoid(score)). Because
// the truth is known, recovery and ceiling metrics are computable:
// bayes_auroc evaluates the true score on a fresh sample.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"

namespace glassgam {

struct UniformGen {
  double lo = 0.0;
  double hi = 1.0;
};

struct GaussianGen {
  double mean = 0.0;
  double sd = 1.0;
};

struct CategoricalGen {
  std::vector<double> probs;  // must sum to 1 within 1e-9
};

using Generator = std::variant<UniformGen, GaussianGen, CategoricalGen>;

struct LinearEffect {
  double slope = 1.0;
  double center = 0.0;  // slope * (v - center)
};

struct StepEffect {
  double at = 0.0;
  double below = 0.0;  // value for v <= at
  double above = 0.0;
};

struct VeeEffect {
  double scale = 1.0;
  double center = 0.0;
  double shift = 0.0;  // scale * (|v - center| + shift)
};

struct SaturatingEffect {
  double scale = 1.0;
  double rate = 1.0;
  double center = 0.0;  // scale * tanh(rate * (v - center))
};

struct ZeroEffect {};

struct OffsetsEffect {
  std::vector<double> offsets;  // one per category
};

using Effect =
    std::variant<LinearEffect, StepEffect, VeeEffect, SaturatingEffect, ZeroEffect, OffsetsEffect>;

struct SyntheticFeature {
  std::string name;
  Generator gen;
  Effect effect;

  ColumnKind kind() const {
    return std::holds_alternative<CategoricalGen>(gen) ? ColumnKind::categorical
                                                       : ColumnKind::continuous;
  }
};

// Pair term: +amplitude when exactly one of the two features exceeds its
// threshold, -amplitude otherwise. Marginally flat in both features, so it
// leaks nothing into the main effects.
struct XorInteraction {
  std::string feature_a;
  std::string feature_b;
  double threshold_a = 0.0;
  double threshold_b = 0.0;
  double amplitude = 0.0;
};

struct SyntheticSpec {
  std::vector<SyntheticFeature> features;
  double intercept = 0.0;
  std::optional<XorInteraction> interaction;
  std::size_t n_rows = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (features.empty()) throw ConfigError("synthetic spec has no features");
    if (n_rows == 0) throw ConfigError("synthetic spec has no rows");
    for (const auto& f : features) {
      if (const auto* cat = std::get_if<CategoricalGen>(&f.gen)) {
        if (cat->probs.size() < 2) {
          throw ConfigError("categorical feature '" + f.name + "' needs at least 2 categories");
        }
        double sum = 0.0;
        for (const double p : cat->probs) {
          if (p < 0.0) throw ConfigError("negative category probability in '" + f.name + "'");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw ConfigError("category probabilities of '" + f.name + "' do not sum to 1");
        }
        const auto* off = std::get_if<OffsetsEffect>(&f.effect);
        if (off == nullptr || off->offsets.size() != cat->probs.size()) {
          throw ConfigError("categorical feature '" + f.name +
                            "' needs an offsets effect matching its categories");
        }
      } else if (std::holds_alternative<OffsetsEffect>(f.effect)) {
        throw ConfigError("offsets effect on continuous feature '" + f.name + "'");
      }
    }
    if (interaction) {
      for (const auto* name : {&interaction->feature_a, &interaction->feature_b}) {
        bool found = false;
        for (const auto& f : features) {
          if (f.name == *name) {
            if (f.kind() != ColumnKind::continuous) {
              throw ConfigError("interaction feature '" + *name + "' must be continuous");
            }
            found = true;
          }
        }
        if (!found) throw ConfigError("interaction references unknown feature '" + *name + "'");
      }
      if (interaction->feature_a == interaction->feature_b) {
        throw ConfigError("interaction needs two distinct features");
      }
    }
  }
};

inline double true_contribution(const SyntheticFeature& f, double v) {
  if (const auto* e = std::get_if<LinearEffect>(&f.effect)) {
    return e->slope * (v - e->center);
  }
  if (const auto* e = std::get_if<StepEffect>(&f.effect)) {
    return v <= e->at ? e->below : e->above;
  }
  if (const auto* e = std::get_if<VeeEffect>(&f.effect)) {
    return e->scale * (std::abs(v - e->center) + e->shift);
  }
  if (const auto* e = std::get_if<SaturatingEffect>(&f.effect)) {
    return e->scale * std::tanh(e->rate * (v - e->center));
  }
  if (std::holds_alternative<ZeroEffect>(f.effect)) return 0.0;
  const auto& offsets = std::get<OffsetsEffect>(f.effect).offsets;
  const auto code = static_cast<std::size_t>(v);
  return offsets[code];
}

struct SyntheticSample {
  Dataset data;
  std::vector<double> true_scores;  // link-scale truth per row
};

inline SyntheticSample generate(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticSample out;
  Dataset& d = out.data;
  d.n_rows = spec.n_rows;
  d.schema.reserve(spec.features.size());
  d.columns.reserve(spec.features.size());
  for (const auto& f : spec.features) {
    d.schema.push_back({f.name, f.kind(), true});
    if (f.kind() == ColumnKind::continuous) {
      std::vector<double> col;
      col.reserve(spec.n_rows);
      d.columns.emplace_back(std::move(col));
    } else {
      CategoricalColumn col;
      col.codes.reserve(spec.n_rows);
      const auto& probs = std::get<CategoricalGen>(f.gen).probs;
      for (std::size_t c = 0; c < probs.size(); ++c) {
        col.labels.push_back("c" + std::to_string(c));
      }
      d.columns.emplace_back(std::move(col));
    }
  }
  d.labels.reserve(spec.n_rows);
  out.true_scores.reserve(spec.n_rows);

  std::size_t xa = 0, xb = 0;
  if (spec.interaction) {
    for (std::size_t f = 0; f < spec.features.size(); ++f) {
      if (spec.features[f].name == spec.interaction->feature_a) xa = f;
      if (spec.features[f].name == spec.interaction->feature_b) xb = f;
    }
  }

  std::vector<double> row_values(spec.features.size());
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    Rng rng(derive_seed(spec.seed, streams::row, r));
    double score = spec.intercept;
    for (std::size_t f = 0; f < spec.features.size(); ++f) {
      const auto& feat = spec.features[f];
      double v;
      if (const auto* u = std::get_if<UniformGen>(&feat.gen)) {
        v = u->lo + (u->hi - u->lo) * rng.uniform();
        std::get<std::vector<double>>(d.columns[f]).push_back(v);
      } else if (const auto* g = std::get_if<GaussianGen>(&feat.gen)) {
        v = rng.normal(g->mean, g->sd);
        std::get<std::vector<double>>(d.columns[f]).push_back(v);
      } else {
        const auto& probs = std::get<CategoricalGen>(feat.gen).probs;
        const double u01 = rng.uniform();
        double cum = 0.0;
        std::size_t code = probs.size() - 1;
        for (std::size_t c = 0; c < probs.size(); ++c) {
          cum += probs[c];
          if (u01 < cum) {
            code = c;
            break;
          }
        }
        v = static_cast<double>(code);
        std::get<CategoricalColumn>(d.columns[f]).codes.push_back(
            static_cast<std::int32_t>(code));
      }
      row_values[f] = v;
      score += true_contribution(feat, v);
    }
    if (spec.interaction) {
      const bool ea = row_values[xa] > spec.interaction->threshold_a;
      const bool eb = row_values[xb] > spec.interaction->threshold_b;
      score += ea != eb ? spec.interaction->amplitude : -spec.interaction->amplitude;
    }
    out.true_scores.push_back(score);
    d.labels.push_back(rng.bernoulli(sigmoid(score)) ? 1 : 0);
  }
  return out;
}

// Discrimination ceiling: AUROC of the true score on a fresh sample drawn
// from an evaluation substream of spec.seed.
inline double bayes_auroc(const SyntheticSpec& spec, std::size_t n_eval);

// ---------------------------------------------------------------------------
// Reference generator used across the test and evaluation suites: five
// continuous features with linear / step / vee / saturating / null effects,
// one 4-level categorical, and (optionally) an XOR pair on x_linear and
// x_null. The intercept puts the positive rate near 3 percent.
inline SyntheticSpec standard_spec(std::size_t n_rows, std::uint64_t seed,
                                   bool with_interaction = true) {
  SyntheticSpec spec;
  spec.n_rows = n_rows;
  spec.seed = seed;
  spec.intercept = -4.22;
  spec.features = {
      {"x_linear", UniformGen{0.0, 1.0}, LinearEffect{1.6, 0.5}},
      {"x_step", UniformGen{0.0, 1.0}, StepEffect{0.6, -0.3, 0.7}},
      {"x_vee", GaussianGen{0.0, 1.0}, VeeEffect{0.8, 0.0, -0.8}},
      {"x_sat", UniformGen{0.0, 1.0}, SaturatingEffect{0.9, 4.0, 0.5}},
      {"x_null", GaussianGen{0.0, 1.0}, ZeroEffect{}},
      {"x_cat", CategoricalGen{{0.4, 0.3, 0.2, 0.1}},
       OffsetsEffect{{-0.4, 0.0, 0.3, 0.8}}},
  };
  if (with_interaction) {
    spec.interaction = XorInteraction{"x_linear", "x_null", 0.5, 0.0, 0.45};
  }
  return spec;
}

}  // namespace glassgam

#include "glassgam/metrics.hpp"

namespace glassgam {

inline double bayes_auroc(const SyntheticSpec& spec, std::size_t n_eval) {
  if (n_eval < 2) throw ValueError("bayes_auroc: n_eval too small");
  SyntheticSpec eval_spec = spec;
  eval_spec.n_rows = n_eval;
  eval_spec.seed = derive_seed(spec.seed, streams::eval);
  const auto sample = generate(eval_spec);
  return auroc(sample.data.labels, sample.true_scores);
}

}  // namespace glassgam
