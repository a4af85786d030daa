#pragma once

// JSON run configuration shared by all CLI subcommands. Parsing is strict:
// unknown keys are rejected at every level so typos fail loudly instead of
// silently reverting to defaults. Every run writes back its fully resolved
// configuration (defaults materialized) next to its outputs.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"
#include "glassgam/metrics.hpp"
#include "glassgam/robustness.hpp"
#include "glassgam/splits.hpp"
#include "glassgam/synthetic.hpp"
#include "glassgam/train.hpp"

namespace glassgam {

struct DataConfig {
  std::string path;
  char delimiter = ',';
  std::string missing_token;
  std::string label_column = "label";
  std::string group_column;
  std::vector<ColumnSchema> features;
  std::vector<PlausibilityRule> filters;

  CsvSpec csv_spec() const {
    return CsvSpec{features, label_column, group_column, delimiter, missing_token};
  }
};

struct MetricsConfig {
  int bootstrap_resamples = 1000;
  double alpha = 0.05;
  int calibration_bins = 10;
  CalibrationBinning binning = CalibrationBinning::uniform_width;
};

struct SplitSettings {
  std::string roster_path;  // csv: group,level,samples; empty = derive from data
  PartitionConfig partition;
};

struct ExplainSettings {
  std::vector<std::string> flatten;  // features to zero out in a derived model
};

struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output_dir = "out";
  DataConfig data;
  TrainConfig train;
  bool train_baseline = false;
  MetricsConfig metrics;
  SweepConfig sweep;
  SplitSettings splits;
  ExplainSettings explain;
  std::optional<SyntheticSpec> synth;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + context);
    }
  }
}

inline ColumnKind parse_kind(const std::string& s, const std::string& context) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "categorical") return ColumnKind::categorical;
  throw ConfigError(context + ": unknown column kind '" + s + "'");
}

inline FilterPredicate parse_predicate(const std::string& s) {
  if (s == "greater_than") return FilterPredicate::greater_than;
  if (s == "less_than") return FilterPredicate::less_than;
  if (s == "negative") return FilterPredicate::negative;
  throw ConfigError("unknown filter predicate '" + s + "'");
}

inline DataConfig parse_data_config(const nlohmann::json& j) {
  check_keys(j, {"path", "delimiter", "missing_token", "label", "group", "features", "filters"},
             "data");
  DataConfig d;
  if (j.contains("path")) d.path = j.at("path").get<std::string>();
  if (j.contains("delimiter")) {
    const auto s = j.at("delimiter").get<std::string>();
    if (s.size() != 1) throw ConfigError("data.delimiter must be a single character");
    d.delimiter = s[0];
  }
  if (j.contains("missing_token")) d.missing_token = j.at("missing_token").get<std::string>();
  if (j.contains("label")) d.label_column = j.at("label").get<std::string>();
  if (j.contains("group")) d.group_column = j.at("group").get<std::string>();
  if (j.contains("features")) {
    for (const auto& jf : j.at("features")) {
      check_keys(jf, {"name", "kind", "allowed_missing"}, "data.features entry");
      ColumnSchema sc;
      sc.name = jf.at("name").get<std::string>();
      sc.kind = parse_kind(jf.at("kind").get<std::string>(), "data.features");
      if (jf.contains("allowed_missing")) {
        sc.allowed_missing = jf.at("allowed_missing").get<bool>();
      }
      d.features.push_back(std::move(sc));
    }
  }
  if (j.contains("filters")) {
    for (const auto& jr : j.at("filters")) {
      check_keys(jr, {"column", "predicate", "threshold"}, "data.filters entry");
      PlausibilityRule rule;
      rule.column = jr.at("column").get<std::string>();
      rule.predicate = parse_predicate(jr.at("predicate").get<std::string>());
      if (jr.contains("threshold")) rule.threshold = jr.at("threshold").get<double>();
      if (rule.predicate != FilterPredicate::negative && !jr.contains("threshold")) {
        throw ConfigError("filter on '" + rule.column + "' needs a threshold");
      }
      d.filters.push_back(std::move(rule));
    }
  }
  return d;
}

inline void parse_train_config(const nlohmann::json& j, TrainConfig& t) {
  check_keys(j,
             {"learning_rate", "max_rounds", "outer_bags", "inner_bags", "min_samples_leaf",
              "interactions", "max_splits_per_tree", "early_stop_patience",
              "validation_fraction", "inner_sample_rate", "outer_bootstrap", "interaction_grid",
              "max_bins", "link"},
             "train");
  if (j.contains("learning_rate")) t.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("max_rounds")) t.max_rounds = j.at("max_rounds").get<int>();
  if (j.contains("outer_bags")) t.outer_bags = j.at("outer_bags").get<int>();
  if (j.contains("inner_bags")) t.inner_bags = j.at("inner_bags").get<int>();
  if (j.contains("min_samples_leaf")) t.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  if (j.contains("interactions")) t.interactions = j.at("interactions").get<int>();
  if (j.contains("max_splits_per_tree")) {
    t.max_splits_per_tree = j.at("max_splits_per_tree").get<int>();
  }
  if (j.contains("early_stop_patience")) {
    t.early_stop_patience = j.at("early_stop_patience").get<int>();
  }
  if (j.contains("validation_fraction")) {
    t.validation_fraction = j.at("validation_fraction").get<double>();
  }
  if (j.contains("inner_sample_rate")) {
    t.inner_sample_rate = j.at("inner_sample_rate").get<double>();
  }
  if (j.contains("outer_bootstrap")) t.outer_bootstrap = j.at("outer_bootstrap").get<bool>();
  if (j.contains("interaction_grid")) t.interaction_grid = j.at("interaction_grid").get<int>();
  if (j.contains("max_bins")) t.max_bins = j.at("max_bins").get<int>();
  if (j.contains("link")) {
    const auto s = j.at("link").get<std::string>();
    if (s == "logistic") {
      t.link = LinkFunction::logistic;
    } else if (s == "identity") {
      t.link = LinkFunction::identity;
    } else {
      throw ConfigError("train.link must be 'logistic' or 'identity'");
    }
  }
}

inline MetricsConfig parse_metrics_config(const nlohmann::json& j) {
  check_keys(j, {"bootstrap_resamples", "alpha", "calibration_bins", "calibration_binning"},
             "metrics");
  MetricsConfig m;
  if (j.contains("bootstrap_resamples")) {
    m.bootstrap_resamples = j.at("bootstrap_resamples").get<int>();
  }
  if (j.contains("alpha")) m.alpha = j.at("alpha").get<double>();
  if (j.contains("calibration_bins")) m.calibration_bins = j.at("calibration_bins").get<int>();
  if (j.contains("calibration_binning")) {
    const auto s = j.at("calibration_binning").get<std::string>();
    if (s == "uniform_width") {
      m.binning = CalibrationBinning::uniform_width;
    } else if (s == "equal_frequency") {
      m.binning = CalibrationBinning::equal_frequency;
    } else {
      throw ConfigError("metrics.calibration_binning must be uniform_width or equal_frequency");
    }
  }
  return m;
}

inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
  check_keys(j, {"sizes", "features", "x_scaling"}, "sweep");
  SweepConfig s;
  if (j.contains("sizes")) s.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  if (j.contains("features")) s.features = j.at("features").get<std::vector<std::string>>();
  if (j.contains("x_scaling")) {
    const auto v = j.at("x_scaling").get<std::string>();
    if (v == "unit_interval") {
      s.x_scaling = XScaling::unit_interval;
    } else if (v == "raw") {
      s.x_scaling = XScaling::raw;
    } else {
      throw ConfigError("sweep.x_scaling must be unit_interval or raw");
    }
  }
  return s;
}

inline SplitSettings parse_split_settings(const nlohmann::json& j) {
  check_keys(j,
             {"roster", "target_test_fraction", "tolerance", "min_per_level_per_side",
              "max_plans"},
             "splits");
  SplitSettings s;
  if (j.contains("roster")) s.roster_path = j.at("roster").get<std::string>();
  if (j.contains("target_test_fraction")) {
    s.partition.target_test_fraction = j.at("target_test_fraction").get<double>();
  }
  if (j.contains("tolerance")) s.partition.tolerance = j.at("tolerance").get<double>();
  if (j.contains("min_per_level_per_side")) {
    s.partition.min_per_level_per_side = j.at("min_per_level_per_side").get<int>();
  }
  if (j.contains("max_plans")) s.partition.max_plans = j.at("max_plans").get<std::size_t>();
  return s;
}

inline Generator parse_generator(const nlohmann::json& j) {
  check_keys(j, {"type", "lo", "hi", "mean", "sd", "probs"}, "synth generator");
  const auto type = j.at("type").get<std::string>();
  if (type == "uniform") {
    UniformGen g;
    if (j.contains("lo")) g.lo = j.at("lo").get<double>();
    if (j.contains("hi")) g.hi = j.at("hi").get<double>();
    return g;
  }
  if (type == "gaussian") {
    GaussianGen g;
    if (j.contains("mean")) g.mean = j.at("mean").get<double>();
    if (j.contains("sd")) g.sd = j.at("sd").get<double>();
    return g;
  }
  if (type == "categorical") {
    return CategoricalGen{j.at("probs").get<std::vector<double>>()};
  }
  throw ConfigError("unknown synth generator type '" + type + "'");
}

inline Effect parse_effect(const nlohmann::json& j) {
  check_keys(j, {"type", "slope", "center", "at", "below", "above", "scale", "shift", "rate",
                 "offsets"},
             "synth effect");
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearEffect e;
    if (j.contains("slope")) e.slope = j.at("slope").get<double>();
    if (j.contains("center")) e.center = j.at("center").get<double>();
    return e;
  }
  if (type == "step") {
    StepEffect e;
    if (j.contains("at")) e.at = j.at("at").get<double>();
    if (j.contains("below")) e.below = j.at("below").get<double>();
    if (j.contains("above")) e.above = j.at("above").get<double>();
    return e;
  }
  if (type == "vee") {
    VeeEffect e;
    if (j.contains("scale")) e.scale = j.at("scale").get<double>();
    if (j.contains("center")) e.center = j.at("center").get<double>();
    if (j.contains("shift")) e.shift = j.at("shift").get<double>();
    return e;
  }
  if (type == "saturating") {
    SaturatingEffect e;
    if (j.contains("scale")) e.scale = j.at("scale").get<double>();
    if (j.contains("rate")) e.rate = j.at("rate").get<double>();
    if (j.contains("center")) e.center = j.at("center").get<double>();
    return e;
  }
  if (type == "zero") return ZeroEffect{};
  if (type == "offsets") return OffsetsEffect{j.at("offsets").get<std::vector<double>>()};
  throw ConfigError("unknown synth effect type '" + type + "'");
}

inline SyntheticSpec parse_synth_spec(const nlohmann::json& j, std::uint64_t seed) {
  check_keys(j, {"standard", "n_rows", "intercept", "features", "interaction"}, "synth");
  if (j.contains("standard")) {
    // shorthand: {"standard": true|"no_interaction", "n_rows": N}
    std::size_t n_rows = 10000;
    if (j.contains("n_rows")) n_rows = j.at("n_rows").get<std::size_t>();
    bool with_interaction = true;
    if (j.at("standard").is_string()) {
      const auto s = j.at("standard").get<std::string>();
      if (s == "no_interaction") {
        with_interaction = false;
      } else if (s != "full") {
        throw ConfigError("synth.standard must be true, 'full', or 'no_interaction'");
      }
    } else if (!j.at("standard").get<bool>()) {
      throw ConfigError("synth.standard must be true, 'full', or 'no_interaction'");
    }
    return standard_spec(n_rows, seed, with_interaction);
  }
  SyntheticSpec spec;
  spec.seed = seed;
  if (j.contains("n_rows")) spec.n_rows = j.at("n_rows").get<std::size_t>();
  if (j.contains("intercept")) spec.intercept = j.at("intercept").get<double>();
  if (!j.contains("features")) throw ConfigError("synth needs features or standard");
  for (const auto& jf : j.at("features")) {
    check_keys(jf, {"name", "generator", "effect"}, "synth.features entry");
    SyntheticFeature f;
    f.name = jf.at("name").get<std::string>();
    f.gen = parse_generator(jf.at("generator"));
    f.effect = parse_effect(jf.at("effect"));
    spec.features.push_back(std::move(f));
  }
  if (j.contains("interaction") && !j.at("interaction").is_null()) {
    const auto& ji = j.at("interaction");
    check_keys(ji, {"feature_a", "feature_b", "threshold_a", "threshold_b", "amplitude"},
               "synth.interaction");
    XorInteraction inter;
    inter.feature_a = ji.at("feature_a").get<std::string>();
    inter.feature_b = ji.at("feature_b").get<std::string>();
    inter.threshold_a = ji.at("threshold_a").get<double>();
    inter.threshold_b = ji.at("threshold_b").get<double>();
    inter.amplitude = ji.at("amplitude").get<double>();
    spec.interaction = inter;
  }
  spec.validate();
  return spec;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  try {
    detail::check_keys(j,
                       {"seed", "threads", "output_dir", "data", "train", "train_baseline",
                        "metrics", "sweep", "splits", "explain", "synth"},
                       "config");
    RunConfig cfg;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("data")) cfg.data = detail::parse_data_config(j.at("data"));
    if (j.contains("train")) detail::parse_train_config(j.at("train"), cfg.train);
    if (j.contains("train_baseline")) cfg.train_baseline = j.at("train_baseline").get<bool>();
    if (j.contains("metrics")) cfg.metrics = detail::parse_metrics_config(j.at("metrics"));
    if (j.contains("sweep")) cfg.sweep = detail::parse_sweep_config(j.at("sweep"));
    if (j.contains("splits")) cfg.splits = detail::parse_split_settings(j.at("splits"));
    if (j.contains("explain")) {
      detail::check_keys(j.at("explain"), {"flatten"}, "explain");
      if (j.at("explain").contains("flatten")) {
        cfg.explain.flatten = j.at("explain").at("flatten").get<std::vector<std::string>>();
      }
    }
    if (j.contains("synth")) cfg.synth = detail::parse_synth_spec(j.at("synth"), cfg.seed);
    // one master seed fans out to every component
    cfg.train.seed = cfg.seed;
    cfg.train.threads = cfg.threads;
    cfg.sweep.seed = cfg.seed;
    cfg.splits.partition.seed = cfg.seed;
    if (cfg.synth) cfg.synth->seed = cfg.seed;
    cfg.train.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

// Fully resolved view (defaults materialized) written next to run outputs.
inline std::string resolved_config_json(const RunConfig& cfg) {
  using nlohmann::json;
  json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  json data;
  data["path"] = cfg.data.path;
  data["delimiter"] = std::string(1, cfg.data.delimiter);
  data["missing_token"] = cfg.data.missing_token;
  data["label"] = cfg.data.label_column;
  data["group"] = cfg.data.group_column;
  json features = json::array();
  for (const auto& f : cfg.data.features) {
    features.push_back({{"name", f.name},
                        {"kind", f.kind == ColumnKind::continuous ? "continuous" : "categorical"},
                        {"allowed_missing", f.allowed_missing}});
  }
  data["features"] = std::move(features);
  json filters = json::array();
  for (const auto& r : cfg.data.filters) {
    std::string pred = r.predicate == FilterPredicate::greater_than ? "greater_than"
                       : r.predicate == FilterPredicate::less_than  ? "less_than"
                                                                    : "negative";
    filters.push_back({{"column", r.column}, {"predicate", pred}, {"threshold", r.threshold}});
  }
  data["filters"] = std::move(filters);
  j["data"] = std::move(data);
  const auto& t = cfg.train;
  j["train"] = {{"learning_rate", t.learning_rate},
                {"max_rounds", t.max_rounds},
                {"outer_bags", t.outer_bags},
                {"inner_bags", t.inner_bags},
                {"min_samples_leaf", t.min_samples_leaf},
                {"interactions", t.interactions},
                {"max_splits_per_tree", t.max_splits_per_tree},
                {"early_stop_patience", t.early_stop_patience},
                {"validation_fraction", t.validation_fraction},
                {"inner_sample_rate", t.inner_sample_rate},
                {"outer_bootstrap", t.outer_bootstrap},
                {"interaction_grid", t.interaction_grid},
                {"max_bins", t.max_bins},
                {"link", t.link == LinkFunction::logistic ? "logistic" : "identity"}};
  j["train_baseline"] = cfg.train_baseline;
  j["metrics"] = {{"bootstrap_resamples", cfg.metrics.bootstrap_resamples},
                  {"alpha", cfg.metrics.alpha},
                  {"calibration_bins", cfg.metrics.calibration_bins},
                  {"calibration_binning",
                   cfg.metrics.binning == CalibrationBinning::uniform_width
                       ? "uniform_width"
                       : "equal_frequency"}};
  j["sweep"] = {{"sizes", cfg.sweep.sizes},
                {"features", cfg.sweep.features},
                {"x_scaling",
                 cfg.sweep.x_scaling == XScaling::unit_interval ? "unit_interval" : "raw"}};
  j["splits"] = {{"roster", cfg.splits.roster_path},
                 {"target_test_fraction", cfg.splits.partition.target_test_fraction},
                 {"tolerance", cfg.splits.partition.tolerance},
                 {"min_per_level_per_side", cfg.splits.partition.min_per_level_per_side},
                 {"max_plans", cfg.splits.partition.max_plans}};
  j["explain"] = {{"flatten", cfg.explain.flatten}};
  return j.dump(2) + "\n";
}

}  // namespace glassgam
