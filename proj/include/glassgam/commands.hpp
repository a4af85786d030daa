#pragma once

// Subcommand implementations shared by the CLI binary and the test suite.
// Each command reads a RunConfig, writes its artifacts plus the resolved
// configuration and a line-oriented log under output_dir, and returns the
// list of files written. Errors propagate as glassgam::Error; the binary
// turns them into a one-line diagnostic and a nonzero exit. Log content is
// deterministic (no timestamps), so reruns produce identical trees.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glassgam/binning.hpp"
#include "glassgam/config.hpp"
#include "glassgam/dataset.hpp"
#include "glassgam/logreg.hpp"
#include "glassgam/metrics.hpp"
#include "glassgam/model.hpp"
#include "glassgam/model_io.hpp"
#include "glassgam/robustness.hpp"
#include "glassgam/splits.hpp"
#include "glassgam/svg.hpp"
#include "glassgam/synthetic.hpp"
#include "glassgam/train.hpp"

namespace glassgam {

namespace cmd_detail {

struct RunLog {
  std::vector<std::string> lines;
  std::ostream* echo = nullptr;

  void line(std::string s) {
    if (echo) *echo << s << '\n';
    lines.push_back(std::move(s));
  }

  std::string text() const {
    std::string out;
    for (const auto& l : lines) {
      out += l;
      out += '\n';
    }
    return out;
  }
};

inline std::string sanitize(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

struct Emitter {
  std::string dir;
  std::vector<std::string> written;

  std::string path(const std::string& rel) const {
    return (std::filesystem::path(dir) / rel).string();
  }

  void file(const std::string& rel, const std::string& content) {
    const std::string full = path(rel);
    std::filesystem::create_directories(std::filesystem::path(full).parent_path());
    write_text_file(full, content);
    written.push_back(full);
  }
};

inline std::string csv_text(const Dataset& d, const std::string& label_column,
                            const std::string& group_column, char delimiter) {
  std::ostringstream out;
  write_csv(d, out, label_column, group_column, delimiter);
  return out.str();
}

inline Emitter open_emitter(const RunConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  std::filesystem::create_directories(cfg.output_dir);
  Emitter e;
  e.dir = cfg.output_dir;
  e.file("resolved_config.json", resolved_config_json(cfg));
  return e;
}

struct Prepared {
  Dataset data;
  FilterReport filters;
  ImputeSummary imputation;
  std::size_t rows_loaded = 0;
};

inline Prepared prepare_data(const DataConfig& dc) {
  if (dc.path.empty()) throw ConfigError("data.path is required for this command");
  const Dataset raw = load_csv(dc.path, dc.csv_spec());
  Prepared p;
  p.rows_loaded = raw.n_rows;
  auto [filtered, report] = apply_filters(raw, dc.filters);
  p.filters = std::move(report);
  auto [imputed, summary] = impute_with_summary(filtered);
  p.data = std::move(imputed);
  p.imputation = std::move(summary);
  return p;
}

inline void log_preparation(RunLog& log, const Prepared& p, const DataConfig& dc) {
  log.line("loaded " + std::to_string(p.rows_loaded) + " rows from " + dc.path);
  for (const auto& rd : p.filters.per_rule) {
    std::string pred = rd.rule.predicate == FilterPredicate::greater_than ? "greater_than"
                       : rd.rule.predicate == FilterPredicate::less_than  ? "less_than"
                                                                          : "negative";
    log.line("filter " + rd.rule.column + " " + pred + " fired on " +
             std::to_string(rd.rows_dropped) + " rows");
  }
  log.line("dropped " + std::to_string(p.filters.rows_dropped_total) + " rows, kept " +
           std::to_string(p.filters.rows_kept));
  for (const auto& [col, n] : p.imputation.imputed_cells) {
    log.line("imputed " + std::to_string(n) + " cells in " + col);
  }
}

// Training and sweep data may come from a CSV or directly from the synthetic
// generator when no path is configured.
inline Dataset obtain_data(const RunConfig& cfg, RunLog& log) {
  if (!cfg.data.path.empty()) {
    Prepared p = prepare_data(cfg.data);
    log_preparation(log, p, cfg.data);
    return std::move(p.data);
  }
  if (cfg.synth) {
    SyntheticSample sample = generate(*cfg.synth);
    std::size_t pos = 0;
    for (const int y : sample.data.labels) pos += static_cast<std::size_t>(y);
    log.line("generated " + std::to_string(sample.data.n_rows) + " synthetic rows (" +
             std::to_string(pos) + " positive)");
    return std::move(sample.data);
  }
  throw ConfigError("no data source: set data.path or a synth block");
}

inline std::string shape_tsv(const ShapeFunction& s) {
  std::string out;
  if (s.bins.kind == ColumnKind::continuous) {
    out = "bin\tlo\thi\tvalue\tstderr\tcount\n";
    const std::size_t B = s.values.size();
    for (std::size_t b = 0; b < B; ++b) {
      const double lo = b == 0 ? s.bins.value_min : s.bins.cuts[b - 1];
      const double hi = b + 1 == B ? s.bins.value_max : s.bins.cuts[b];
      out += std::to_string(b) + "\t" + fmt_double(lo) + "\t" + fmt_double(hi) + "\t" +
             fmt_double(s.values[b]) + "\t" + fmt_double(s.stderrs[b]) + "\t" +
             std::to_string(s.bins.counts[b]) + "\n";
    }
  } else {
    out = "bin\tcategory\tvalue\tstderr\tcount\n";
    for (std::size_t b = 0; b < s.values.size(); ++b) {
      out += std::to_string(b) + "\t" + s.bins.category_labels[b] + "\t" +
             fmt_double(s.values[b]) + "\t" + fmt_double(s.stderrs[b]) + "\t" +
             std::to_string(s.bins.counts[b]) + "\n";
    }
  }
  return out;
}

inline std::string pair_tsv(const InteractionSurface& s) {
  std::string out = "cell_a\tcell_b\tvalue\tcount\n";
  for (std::size_t a = 0; a < s.n_cells_a; ++a) {
    for (std::size_t b = 0; b < s.n_cells_b; ++b) {
      const std::size_t idx = a * s.n_cells_b + b;
      out += std::to_string(a) + "\t" + std::to_string(b) + "\t" + fmt_double(s.values[idx]) +
             "\t" + std::to_string(s.cell_counts[idx]) + "\n";
    }
  }
  return out;
}

inline std::string importance_tsv(const std::vector<ImportanceEntry>& entries) {
  std::string out = "rank\tname\timportance\tinteraction\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out += std::to_string(i + 1) + "\t" + entries[i].name + "\t" +
           fmt_double(entries[i].importance) + "\t" + (entries[i].is_interaction ? "1" : "0") +
           "\n";
  }
  return out;
}

inline void emit_model_views(Emitter& em, const AdditiveModel& model) {
  for (const auto& shape : model.shapes) {
    const std::string base = "shapes/shape_" + sanitize(shape.feature);
    em.file(base + ".tsv", shape_tsv(shape));
    em.file(base + ".svg", svg_shape_plot(shape));
  }
  for (const auto& pair : model.interactions) {
    em.file("shapes/pair_" + sanitize(pair.feature_a) + "__" + sanitize(pair.feature_b) +
                ".tsv",
            pair_tsv(pair));
  }
}

inline void emit_importance(Emitter& em, const AdditiveModel& model, const Dataset& d,
                            RunLog& log) {
  const auto entries = feature_importance(model, d);
  em.file("importance.tsv", importance_tsv(entries));
  em.file("importance.svg", svg_importance_plot(entries));
  const std::size_t show = std::min<std::size_t>(3, entries.size());
  for (std::size_t i = 0; i < show; ++i) {
    log.line("importance " + std::to_string(i + 1) + ": " + entries[i].name + " " +
             fmt_double(entries[i].importance));
  }
}

inline nlohmann::json calibration_json(const CalibrationReport& rep) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : rep.bins) {
    bins.push_back({{"bin", b.bin_index},
                    {"mean_predicted", b.mean_predicted},
                    {"observed_rate", b.observed_rate},
                    {"count", b.count}});
  }
  return {{"n_bins", rep.n_bins},
          {"binning",
           rep.binning == CalibrationBinning::uniform_width ? "uniform_width"
                                                            : "equal_frequency"},
          {"bins", std::move(bins)},
          {"empty_bins", rep.empty_bins}};
}

struct EvalSeries {
  std::string name;
  nlohmann::json block;
  CalibrationReport uniform;
};

inline EvalSeries evaluate_scores(const std::string& name, std::span<const int> labels,
                                  const std::vector<double>& probs, const MetricsConfig& mc,
                                  std::uint64_t seed, RunLog& log) {
  EvalSeries series;
  series.name = name;
  nlohmann::json& b = series.block;
  b["log_loss"] = log_loss(labels, probs);
  try {
    const AurocCi ci = bootstrap_auroc_ci(labels, probs, mc.bootstrap_resamples, mc.alpha, seed);
    b["auroc"] = ci.point;
    b["auroc_ci"] = {{"lower", ci.lower},
                     {"upper", ci.upper},
                     {"alpha", ci.alpha},
                     {"resamples", ci.resamples},
                     {"skipped", ci.skipped}};
    log.line(name + " auroc " + fmt_double(ci.point) + " ci [" + fmt_double(ci.lower) + ", " +
             fmt_double(ci.upper) + "]");
  } catch (const ValueError& e) {
    b["auroc_error"] = e.what();
    log.line(name + " auroc unavailable: " + std::string(e.what()));
  }
  series.uniform = calibration_curve(labels, probs, mc.calibration_bins,
                                     CalibrationBinning::uniform_width);
  const auto eqf = calibration_curve(labels, probs, mc.calibration_bins,
                                     CalibrationBinning::equal_frequency);
  b["calibration_uniform"] = calibration_json(series.uniform);
  b["calibration_equal_frequency"] = calibration_json(eqf);
  log.line(name + " log_loss " + fmt_double(b["log_loss"].get<double>()));
  return series;
}

inline std::string calibration_tsv(const std::vector<EvalSeries>& series) {
  std::string out = "series\tbin\tmean_predicted\tobserved_rate\tcount\n";
  for (const auto& s : series) {
    for (const auto& b : s.uniform.bins) {
      out += s.name + "\t" + std::to_string(b.bin_index) + "\t" + fmt_double(b.mean_predicted) +
             "\t" + fmt_double(b.observed_rate) + "\t" + std::to_string(b.count) + "\n";
    }
  }
  return out;
}

inline std::vector<GroupInfo> parse_roster(const std::string& text) {
  std::vector<GroupInfo> groups;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, ',');
    if (header) {
      if (cells.size() != 3 || trim(cells[0]) != "group" || trim(cells[1]) != "level" ||
          trim(cells[2]) != "samples") {
        throw SchemaError("roster header must be: group,level,samples");
      }
      header = false;
      continue;
    }
    if (cells.size() != 3) throw ParseError("roster row needs 3 cells: " + line);
    GroupInfo g;
    g.id = trim(cells[0]);
    g.level = static_cast<int>(parse_int(trim(cells[1])));
    const long long n = parse_int(trim(cells[2]));
    if (n < 1) throw ValueError("roster group '" + g.id + "' needs samples >= 1");
    g.n_samples = static_cast<std::size_t>(n);
    if (g.id.empty()) throw ValueError("roster group id must not be empty");
    if (!seen.insert(g.id).second) throw ValueError("duplicate roster group '" + g.id + "'");
    groups.push_back(std::move(g));
  }
  if (groups.empty()) throw ValueError("roster has no groups");
  return groups;
}

// Roster derived from the data's group column: ids and sizes observed, all
// groups on a single level (level constraints then only bound group counts).
inline std::vector<GroupInfo> roster_from_data(const Dataset& d) {
  if (!d.has_groups()) throw SchemaError("dataset has no group column");
  std::map<std::string, std::size_t> counts;
  for (const auto& g : d.group_ids) ++counts[g];
  std::vector<GroupInfo> groups;
  for (const auto& [id, n] : counts) groups.push_back(GroupInfo{id, 0, n});
  return groups;
}

}  // namespace cmd_detail

// Load, filter, impute; write the cleaned table and a preprocessing report.
inline std::vector<std::string> cmd_ingest(const RunConfig& cfg, std::ostream* echo = nullptr) {
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  cmd_detail::Prepared p = cmd_detail::prepare_data(cfg.data);
  cmd_detail::log_preparation(log, p, cfg.data);

  em.file("cleaned.csv",
          cmd_detail::csv_text(p.data, cfg.data.label_column,
                               p.data.has_groups() ? cfg.data.group_column : "",
                               cfg.data.delimiter));
  log.line("wrote cleaned.csv with " + std::to_string(p.data.n_rows) + " rows");

  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rd : p.filters.per_rule) {
    std::string pred = rd.rule.predicate == FilterPredicate::greater_than ? "greater_than"
                       : rd.rule.predicate == FilterPredicate::less_than  ? "less_than"
                                                                          : "negative";
    rules.push_back({{"column", rd.rule.column},
                     {"predicate", pred},
                     {"threshold", rd.rule.threshold},
                     {"rows_dropped", rd.rows_dropped}});
  }
  nlohmann::json report = {{"rows_loaded", p.rows_loaded},
                           {"rows_kept", p.filters.rows_kept},
                           {"rows_dropped", p.filters.rows_dropped_total},
                           {"filters", std::move(rules)},
                           {"imputed_cells", p.imputation.imputed_cells},
                           {"continuous_means", p.imputation.continuous_means}};
  em.file("ingest_report.json", report.dump(2) + "\n");
  em.file("run.log", log.text());
  return em.written;
}

// Draw a dataset from the synthetic specification and write it as CSV.
inline std::vector<std::string> cmd_synth(const RunConfig& cfg, std::ostream* echo = nullptr) {
  if (!cfg.synth) throw ConfigError("synth command needs a synth block in the config");
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  const SyntheticSample sample = generate(*cfg.synth);
  std::size_t pos = 0;
  for (const int y : sample.data.labels) pos += static_cast<std::size_t>(y);
  log.line("generated " + std::to_string(sample.data.n_rows) + " rows, " + std::to_string(pos) +
           " positive");

  em.file("synthetic.csv",
          cmd_detail::csv_text(sample.data, cfg.data.label_column, "", cfg.data.delimiter));

  nlohmann::json features = nlohmann::json::array();
  for (const auto& sc : sample.data.schema) {
    features.push_back(
        {{"name", sc.name},
         {"kind", sc.kind == ColumnKind::continuous ? "continuous" : "categorical"}});
  }
  nlohmann::json summary = {{"n_rows", sample.data.n_rows},
                            {"positives", pos},
                            {"positive_rate",
                             static_cast<double>(pos) /
                                 static_cast<double>(std::max<std::size_t>(1, sample.data.n_rows))},
                            {"features", std::move(features)}};
  em.file("synth_summary.json", summary.dump(2) + "\n");
  em.file("run.log", log.text());
  return em.written;
}

// Fit the additive model; write the model document, per-shape exports, the
// importance table, and the per-bag training log.
inline std::vector<std::string> cmd_train(const RunConfig& cfg, std::ostream* echo = nullptr) {
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  const Dataset data = cmd_detail::obtain_data(cfg, log);
  const BinMap bins = build_bins(data, cfg.train.max_bins);
  const BinnedDataset bd = discretize(data, bins);
  const TrainResult result = train(bd, cfg.train);

  for (const auto& note : result.notes) log.line("note: " + note);
  for (const auto& cand : result.detection) {
    log.line("interaction " + cand.name_a + " x " + cand.name_b + " score " +
             fmt_double(cand.score));
  }
  for (const auto& h : result.bags) {
    log.line("bag " + std::to_string(h.bag) + ": " + std::to_string(h.main_rounds) +
             " main rounds, " + std::to_string(h.pair_rounds) + " pair rounds, intercept " +
             fmt_double(h.intercept));
  }

  em.file("model.json", serialize(result.model));
  log.line("wrote model.json");

  std::string tlog = "bag\tround\tstage\ttrain_loss\tval_loss\n";
  for (const auto& h : result.bags) {
    for (std::size_t r = 0; r < h.train_loss.size(); ++r) {
      tlog += std::to_string(h.bag) + "\t" + std::to_string(r) + "\t" +
              (r < static_cast<std::size_t>(h.main_rounds) ? "main" : "pairs") + "\t" +
              fmt_double(h.train_loss[r]) + "\t" +
              (r < h.val_loss.size() ? fmt_double(h.val_loss[r]) : "") + "\n";
    }
  }
  em.file("training_log.tsv", tlog);

  cmd_detail::emit_model_views(em, result.model);
  cmd_detail::emit_importance(em, result.model, data, log);

  if (cfg.train_baseline) {
    const DesignMatrix dm = dummy_encode(data);
    const LinearModel lm = fit_logreg(dm, data.labels);
    em.file("baseline.json", serialize(lm));
    log.line("baseline logistic regression: " + std::to_string(lm.iterations) +
             " iterations, " + (lm.converged ? "converged" : "not converged"));
  }
  em.file("run.log", log.text());
  return em.written;
}

// Score a stored model on the configured data; write AUROC with bootstrap
// CI, log loss, and calibration under both binning conventions, with the
// logistic baseline side by side when provided.
inline std::vector<std::string> cmd_evaluate(const RunConfig& cfg, const std::string& model_path,
                                             const std::string& baseline_path = "",
                                             std::ostream* echo = nullptr) {
  if (model_path.empty()) throw ConfigError("evaluate needs a model document path");
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  const AdditiveModel model = deserialize_additive(read_text_file(model_path));
  const Dataset data = cmd_detail::obtain_data(cfg, log);
  const BinnedDataset bd = discretize(data, model.binmap);
  const std::vector<double> probs = predict_proba_all(model, bd);

  std::size_t pos = 0;
  for (const int y : data.labels) pos += static_cast<std::size_t>(y);
  log.line("evaluating " + std::to_string(data.n_rows) + " rows (" + std::to_string(pos) +
           " positive)");

  std::vector<cmd_detail::EvalSeries> series;
  series.push_back(cmd_detail::evaluate_scores("model", data.labels, probs, cfg.metrics,
                                               cfg.seed, log));
  if (!baseline_path.empty()) {
    const LinearModel lm = deserialize_linear(read_text_file(baseline_path));
    const std::vector<double> base_probs = predict_logreg(lm, data);
    series.push_back(cmd_detail::evaluate_scores("baseline", data.labels, base_probs,
                                                 cfg.metrics, cfg.seed, log));
  }

  nlohmann::json report = {{"n_rows", data.n_rows}, {"positives", pos}};
  for (auto& s : series) report[s.name] = std::move(s.block);
  em.file("evaluation.json", report.dump(2) + "\n");
  em.file("calibration.tsv", cmd_detail::calibration_tsv(series));
  std::vector<std::pair<std::string, CalibrationReport>> plots;
  for (const auto& s : series) plots.emplace_back(s.name, s.uniform);
  em.file("calibration.svg", svg_calibration_plot(plots));
  em.file("run.log", log.text());
  return em.written;
}

// Re-export a stored model's shapes and summary without retraining;
// optionally write a copy with configured features flattened to zero.
inline std::vector<std::string> cmd_explain(const RunConfig& cfg, const std::string& model_path,
                                            std::ostream* echo = nullptr) {
  if (model_path.empty()) throw ConfigError("explain needs a model document path");
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  const AdditiveModel model = deserialize_additive(read_text_file(model_path));
  log.line("loaded model with " + std::to_string(model.shapes.size()) + " shapes and " +
           std::to_string(model.interactions.size()) + " interactions");
  cmd_detail::emit_model_views(em, model);

  std::vector<std::string> feature_names;
  for (const auto& s : model.shapes) feature_names.push_back(s.feature);
  nlohmann::json summary = {{"intercept", model.intercept},
                            {"link", model.link == LinkFunction::logistic ? "logistic"
                                                                          : "identity"},
                            {"features", feature_names},
                            {"n_interactions", model.interactions.size()},
                            {"notes", model.metadata.notes}};
  em.file("model_summary.json", summary.dump(2) + "\n");

  if (!cfg.data.path.empty()) {
    cmd_detail::Prepared p = cmd_detail::prepare_data(cfg.data);
    cmd_detail::log_preparation(log, p, cfg.data);
    cmd_detail::emit_importance(em, model, p.data, log);
  }

  if (!cfg.explain.flatten.empty()) {
    AdditiveModel flat = model;
    for (const auto& name : cfg.explain.flatten) {
      flat = zero_out_feature(flat, name);
      log.line("flattened " + name);
    }
    em.file("model_flattened.json", serialize(flat));
  }
  em.file("run.log", log.text());
  return em.written;
}

// Shape-robustness sweep across nested training subsets.
inline std::vector<std::string> cmd_sweep(const RunConfig& cfg, std::ostream* echo = nullptr) {
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  const Dataset data = cmd_detail::obtain_data(cfg, log);
  const SweepResult sweep = run_sweep(data, cfg.sweep, cfg.train);

  std::string tsv = "feature\tsize\tpositives\tdegenerate\tdistance\tnormalized\n";
  nlohmann::json jfeatures = nlohmann::json::array();
  for (const auto& fs : sweep.features) {
    std::size_t at = 0;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : fs.entries) {
      std::string norm;
      if (!e.degenerate) {
        norm = fmt_double(fs.normalized[at]);
        ++at;
      }
      tsv += fs.feature + "\t" + std::to_string(e.size) + "\t" + std::to_string(e.positives) +
             "\t" + (e.degenerate ? "1" : "0") + "\t" +
             (e.degenerate ? "" : fmt_double(e.distance)) + "\t" + norm + "\n";
      entries.push_back({{"size", e.size},
                         {"positives", e.positives},
                         {"degenerate", e.degenerate},
                         {"distance", e.distance}});
    }
    jfeatures.push_back({{"feature", fs.feature},
                         {"continuous", fs.is_continuous},
                         {"normalize_passthrough", fs.normalize_passthrough},
                         {"entries", std::move(entries)},
                         {"normalized", fs.normalized}});
    log.line("sweep " + fs.feature + ": " + std::to_string(fs.raw_distances.size()) +
             " distances" + (fs.normalize_passthrough ? " (reference distance zero)" : ""));
    em.file("sweep_panel_" + cmd_detail::sanitize(fs.feature) + ".svg", svg_sweep_panel(fs));
  }
  em.file("sweep_distances.tsv", tsv);
  nlohmann::json jr = {{"sizes", sweep.sizes}, {"features", std::move(jfeatures)}};
  em.file("sweep_result.json", jr.dump(2) + "\n");
  em.file("sweep.svg", svg_distance_curves(sweep));
  em.file("run.log", log.text());
  return em.written;
}

// Enumerate grouped train/test partitions satisfying the fraction and
// level-coverage constraints.
inline std::vector<std::string> cmd_splits(const RunConfig& cfg, std::ostream* echo = nullptr) {
  cmd_detail::RunLog log;
  log.echo = echo;
  auto em = cmd_detail::open_emitter(cfg);
  std::vector<GroupInfo> groups;
  if (!cfg.splits.roster_path.empty()) {
    groups = cmd_detail::parse_roster(read_text_file(cfg.splits.roster_path));
    log.line("roster: " + std::to_string(groups.size()) + " groups from " +
             cfg.splits.roster_path);
  } else {
    cmd_detail::Prepared p = cmd_detail::prepare_data(cfg.data);
    cmd_detail::log_preparation(log, p, cfg.data);
    groups = cmd_detail::roster_from_data(p.data);
    log.line("roster: " + std::to_string(groups.size()) + " groups from data column '" +
             cfg.data.group_column + "'");
  }

  const PartitionResult res = generate_partitions(groups, cfg.splits.partition);
  const std::string status = res.status == PartitionStatus::ok ? "ok"
                             : res.status == PartitionStatus::infeasible
                                 ? "infeasible"
                                 : "search_exhausted";
  log.line("partition status: " + status + (res.diagnostic.empty() ? "" : " (" +
           res.diagnostic + ")"));
  log.line(std::to_string(res.plans.size()) + " plans");

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += "|";
      s += v[i];
    }
    return s;
  };
  std::string tsv = "plan\ttest_fraction\ttrain_groups\ttest_groups\n";
  for (std::size_t i = 0; i < res.plans.size(); ++i) {
    tsv += std::to_string(i) + "\t" + fmt_double(res.plans[i].test_fraction) + "\t" +
           join(res.plans[i].train_groups) + "\t" + join(res.plans[i].test_groups) + "\n";
  }
  em.file("split_plans.tsv", tsv);

  nlohmann::json jgroups = nlohmann::json::array();
  for (const auto& g : groups) {
    jgroups.push_back({{"id", g.id}, {"level", g.level}, {"samples", g.n_samples}});
  }
  nlohmann::json jplans = nlohmann::json::array();
  for (const auto& p : res.plans) {
    jplans.push_back({{"train_groups", p.train_groups},
                      {"test_groups", p.test_groups},
                      {"test_fraction", p.test_fraction}});
  }
  nlohmann::json report = {{"status", status},
                           {"diagnostic", res.diagnostic},
                           {"groups", std::move(jgroups)},
                           {"plans", std::move(jplans)}};
  em.file("splits_report.json", report.dump(2) + "\n");
  em.file("run.log", log.text());
  return em.written;
}

}  // namespace glassgam
