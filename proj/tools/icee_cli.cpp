// Command-line entry point: generate / train / evaluate / plot.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "icee/harness/runner.hpp"

namespace {

int error_code(const std::string& category) {
  static const std::map<std::string, int> codes = {
      {"input", 2},   {"data", 3}, {"shape", 4},      {"mode", 5},
      {"length", 6},  {"numeric", 7}, {"io", 8},      {"version", 9},
      {"corruption", 10}, {"config", 11}, {"schema", 12}, {"state", 13}};
  const auto it = codes.find(category);
  return it == codes.end() ? 1 : it->second;
}

struct CommonFlags {
  std::string config, mode, domain, preset, out, dataset, checkpoint;
  int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "flat key=value config file");
  cmd->add_option("--mode", f.mode, "icee|icee-biased|ad|ad-sorted|mgdt|source|gp-ei|random");
  cmd->add_option("--domain", f.domain,
                  "dark_room|dark_room_hard|key_to_door|dark_room_biased|bo");
  cmd->add_option("--preset", f.preset, "desk|paper");
  cmd->add_option("--seed", f.seed, "base RNG seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--dataset", f.dataset, "dataset path (train input)");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path");
}

icee::harness::RunConfig build_config(const CommonFlags& f) {
  using namespace icee::harness;
  RunConfig cfg;
  // flags that shape the preset must land before preset application
  if (!f.mode.empty()) cfg.mode = f.mode;
  if (!f.domain.empty()) cfg.domain = f.domain;
  if (!f.preset.empty()) cfg.preset = f.preset;
  apply_preset(cfg);
  if (!f.config.empty()) cfg = load_config_file(f.config, cfg);
  if (!f.mode.empty()) cfg.mode = f.mode;
  if (!f.domain.empty()) cfg.domain = f.domain;
  if (!f.preset.empty()) cfg.preset = f.preset;
  if (f.seed >= 0) cfg.seed = uint64_t(f.seed);
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.dataset.empty()) cfg.dataset = f.dataset;
  if (!f.checkpoint.empty()) cfg.checkpoint = f.checkpoint;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-context exploration-exploitation experiment harness"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f, plot_f;
  auto* gen = app.add_subcommand("generate", "write a training dataset");
  add_common(gen, gen_f);
  auto* train = app.add_subcommand("train", "train a model");
  add_common(train, train_f);
  auto* eval = app.add_subcommand("evaluate", "evaluate a mode and write metrics CSVs");
  add_common(eval, eval_f);
  auto* plot = app.add_subcommand("plot", "render figures from summary CSVs");
  add_common(plot, plot_f);
  std::vector<std::string> plot_csvs;
  plot->add_option("--csv", plot_csvs, "summary CSV file(s)")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace icee::harness;
    if (gen->parsed()) {
      const auto path = generate(build_config(gen_f));
      std::printf("dataset: %s\n", path.c_str());
    } else if (train->parsed()) {
      const auto res = icee::harness::train(build_config(train_f));
      std::printf("checkpoint: %s (steps=%ld, action_loss=%.4f)\n", res.ckpt_path.c_str(),
                  res.steps_done, res.last_metrics.action_loss);
    } else if (eval->parsed()) {
      const auto cfg = build_config(eval_f);
      if (cfg.is_bo()) {
        const auto ev = evaluate_bo(cfg);
        std::printf("metrics: %s\nsummary: %s\n", ev.rows_csv.c_str(), ev.summary_csv.c_str());
      } else {
        const auto ev = evaluate_grid(cfg);
        std::printf("metrics: %s\nsummary: %s\n", ev.rows_csv.c_str(), ev.summary_csv.c_str());
      }
    } else if (plot->parsed()) {
      const std::string out = plot_f.out.empty() ? "runs/out" : plot_f.out;
      for (const auto& f : icee::harness::plot(plot_csvs, out))
        std::printf("figure: %s\n", f.c_str());
    }
  } catch (const icee::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.category.c_str(), e.what());
    return error_code(e.category);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
