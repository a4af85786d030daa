// Command-line entry point. One JSON config drives each run; flags exist
// only to pick the subcommand and override paths, seed, and thread cap.
// Diagnostics go to stderr, data artifacts to files under output_dir.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <glassgam/glassgam.hpp>

int main(int argc, char** argv) {
  CLI::App app{"glassgam: glass-box additive models with boosted shape functions"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path, model_path, baseline_path;
  std::uint64_t seed = 0;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "override output directory");
    sub->add_option("--data", data_path, "override data CSV path");
    sub->add_option("--seed", seed, "override master seed");
    sub->add_option("--threads", threads, "override worker thread cap (0 = hardware)");
    return sub;
  };

  add_common(app.add_subcommand("ingest", "load, filter, and impute a dataset"));
  add_common(app.add_subcommand("splits", "enumerate grouped train/test partitions"));
  add_common(app.add_subcommand("train", "fit the additive model"));
  auto* sub_eval = add_common(app.add_subcommand("evaluate", "score a stored model"));
  sub_eval->add_option("--model", model_path, "model document")->required();
  sub_eval->add_option("--baseline", baseline_path, "logistic baseline document");
  auto* sub_explain = add_common(app.add_subcommand("explain", "export shapes of a stored model"));
  sub_explain->add_option("--model", model_path, "model document")->required();
  add_common(app.add_subcommand("sweep", "shape robustness across training sizes"));
  add_common(app.add_subcommand("synth", "generate a synthetic dataset"));

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  try {
    glassgam::RunConfig cfg = glassgam::load_run_config(config_path);
    if (sub->count("--out")) cfg.output_dir = out_dir;
    if (sub->count("--data")) cfg.data.path = data_path;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--threads")) cfg.threads = threads;
    // keep the master seed and thread cap fanned out after overrides
    cfg.train.seed = cfg.seed;
    cfg.train.threads = cfg.threads;
    cfg.sweep.seed = cfg.seed;
    cfg.splits.partition.seed = cfg.seed;
    if (cfg.synth) cfg.synth->seed = cfg.seed;

    const std::string name = sub->get_name();
    std::vector<std::string> written;
    if (name == "ingest") {
      written = glassgam::cmd_ingest(cfg, &std::cerr);
    } else if (name == "splits") {
      written = glassgam::cmd_splits(cfg, &std::cerr);
    } else if (name == "train") {
      written = glassgam::cmd_train(cfg, &std::cerr);
    } else if (name == "evaluate") {
      written = glassgam::cmd_evaluate(cfg, model_path, baseline_path, &std::cerr);
    } else if (name == "explain") {
      written = glassgam::cmd_explain(cfg, model_path, &std::cerr);
    } else if (name == "sweep") {
      written = glassgam::cmd_sweep(cfg, &std::cerr);
    } else if (name == "synth") {
      written = glassgam::cmd_synth(cfg, &std::cerr);
    }
    std::cerr << name << ": wrote " << written.size() << " files under " << cfg.output_dir
              << "\n";
    return 0;
  } catch (const glassgam::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
