#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "icee/common.hpp"
#include "icee/env/gridworld.hpp"
#include "icee/model/model.hpp"
#include "icee/objectives.hpp"

namespace icee::harness {

// Flat key=value run configuration with an explicit schema version. Values
// resolve in the order: built-in defaults, preset, config file, CLI flags.
struct RunConfig {
  int schema_version = 1;
  std::string mode = "icee";    // icee|icee-biased|ad|ad-sorted|mgdt|source|gp-ei|random
  std::string domain = "dark_room";  // dark_room|dark_room_hard|key_to_door|dark_room_biased|bo
  std::string preset = "desk";       // desk|paper
  uint64_t seed = 1;
  std::string out = "runs/out";

  // model
  int n_layer = 4;
  int n_embd = 64;
  int n_head = 4;
  int bins = 64;
  int score_hidden = 64;

  // training
  double lr = 1e-5;
  int batch_size = 8;
  long steps = 2000;
  double weight_clip = 20.0;
  double loss_mix = 1.0;

  // grid geometry / data collection
  int grid = 9;
  int episode_len = 20;
  int episodes_per_task = 50;
  int tasks = 1000;  // dataset size for `generate`

  // BO
  int bo_n = 1024;
  int bo_dim = 2;
  int bo_collect_len = 50;
  int bo_budget = 30;
  int bo_functions = 16;
  int bo_trials = 5;
  int bo_init = 2;

  // evaluation
  int eval_tasks = 100;
  double kappa = 5.0;
  double temperature = 1.0;

  // operational
  std::string dataset;     // optional dataset path for train
  std::string checkpoint;  // checkpoint path for evaluate

  bool is_bo() const { return domain == "bo"; }
  bool is_model_mode() const {
    return mode == "icee" || mode == "icee-biased" || mode == "ad" || mode == "ad-sorted" ||
           mode == "mgdt";
  }

  env::GridSpec grid_spec() const {
    env::GridSpec s;
    s.variant = env::variant_from_name(domain);
    s.width = s.height = grid;
    s.episode_len = episode_len;
    return s;
  }

  void validate() const {
    if (schema_version != 1) throw ConfigError("unsupported config schema version");
    static const std::set<std::string> modes = {"icee", "icee-biased", "ad",     "ad-sorted",
                                                "mgdt", "source",      "gp-ei", "random"};
    static const std::set<std::string> domains = {"dark_room", "dark_room_hard",
                                                  "key_to_door", "dark_room_biased", "bo"};
    if (!modes.count(mode)) throw ConfigError("unknown mode: " + mode);
    if (!domains.count(domain)) throw ConfigError("unknown domain: " + domain);
    if ((mode == "gp-ei" || mode == "random") && !is_bo())
      throw ConfigError("mode " + mode + " applies to the bo domain only");
    if ((mode == "ad" || mode == "ad-sorted" || mode == "mgdt" || mode == "source") && is_bo())
      throw ConfigError("mode " + mode + " applies to grid domains only");
    if (preset != "desk" && preset != "paper") throw ConfigError("unknown preset: " + preset);
    if (!is_bo()) {
      const int paper_T = domain == "key_to_door" ? 50 : 20;
      const int paper_K = domain == "key_to_door" ? 20 : 50;
      if (preset == "paper" &&
          (grid != 9 || episode_len != paper_T || episodes_per_task != paper_K))
        throw ConfigError(
            "non-paper grid geometry requires the desk preset (which declares its "
            "overrides in output headers)");
      if (grid < 3 || episode_len < 1 || episodes_per_task < 1)
        throw ConfigError("degenerate grid geometry");
    } else if (preset == "paper" && bo_n != 1024) {
      throw ConfigError("paper preset uses 1024 candidates; use the desk preset to override");
    }
    if (eval_tasks < 1) throw ConfigError("eval_tasks must be positive");
    if (kappa < 0) throw ConfigError("kappa must be nonnegative");
  }

  std::map<std::string, std::string> resolved() const {
    std::map<std::string, std::string> kv;
    kv["schema_version"] = std::to_string(schema_version);
    kv["mode"] = mode;
    kv["domain"] = domain;
    kv["preset"] = preset;
    kv["seed"] = std::to_string(seed);
    kv["out"] = out;
    kv["n_layer"] = std::to_string(n_layer);
    kv["n_embd"] = std::to_string(n_embd);
    kv["n_head"] = std::to_string(n_head);
    kv["bins"] = std::to_string(bins);
    kv["score_hidden"] = std::to_string(score_hidden);
    kv["lr"] = std::to_string(lr);
    kv["batch_size"] = std::to_string(batch_size);
    kv["steps"] = std::to_string(steps);
    kv["weight_clip"] = std::to_string(weight_clip);
    kv["loss_mix"] = std::to_string(loss_mix);
    kv["grid"] = std::to_string(grid);
    kv["episode_len"] = std::to_string(episode_len);
    kv["episodes_per_task"] = std::to_string(episodes_per_task);
    kv["tasks"] = std::to_string(tasks);
    kv["bo_n"] = std::to_string(bo_n);
    kv["bo_dim"] = std::to_string(bo_dim);
    kv["bo_collect_len"] = std::to_string(bo_collect_len);
    kv["bo_budget"] = std::to_string(bo_budget);
    kv["bo_functions"] = std::to_string(bo_functions);
    kv["bo_trials"] = std::to_string(bo_trials);
    kv["bo_init"] = std::to_string(bo_init);
    kv["eval_tasks"] = std::to_string(eval_tasks);
    kv["kappa"] = std::to_string(kappa);
    kv["temperature"] = std::to_string(temperature);
    kv["dataset"] = dataset;
    kv["checkpoint"] = checkpoint;
    return kv;
  }
};

inline void apply_preset(RunConfig& cfg) {
  if (cfg.preset == "paper") {
    cfg.n_layer = 12;
    cfg.n_embd = 128;
    cfg.n_head = 4;
    cfg.lr = 1e-5;
    cfg.bo_n = 1024;
    if (!cfg.is_bo()) {
      cfg.grid = 9;
      cfg.episode_len = cfg.domain == "key_to_door" ? 50 : 20;
      cfg.episodes_per_task = cfg.domain == "key_to_door" ? 20 : 50;
    }
  } else {  // desk
    cfg.n_layer = 4;
    cfg.n_embd = 64;
    cfg.n_head = 4;
    cfg.lr = 3e-4;
    cfg.bo_n = 256;
    if (!cfg.is_bo()) {
      cfg.grid = 5;
      cfg.episode_len = 10;
      cfg.episodes_per_task = 20;
    }
  }
}

inline void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto to_i = [&] { return std::stoi(value); };
  auto to_l = [&] { return std::stol(value); };
  auto to_d = [&] { return std::stod(value); };
  auto to_u = [&] { return uint64_t(std::stoull(value)); };
  if (key == "schema_version") cfg.schema_version = to_i();
  else if (key == "mode") cfg.mode = value;
  else if (key == "domain") cfg.domain = value;
  else if (key == "preset") cfg.preset = value;
  else if (key == "seed") cfg.seed = to_u();
  else if (key == "out") cfg.out = value;
  else if (key == "n_layer") cfg.n_layer = to_i();
  else if (key == "n_embd") cfg.n_embd = to_i();
  else if (key == "n_head") cfg.n_head = to_i();
  else if (key == "bins") cfg.bins = to_i();
  else if (key == "score_hidden") cfg.score_hidden = to_i();
  else if (key == "lr") cfg.lr = to_d();
  else if (key == "batch_size") cfg.batch_size = to_i();
  else if (key == "steps") cfg.steps = to_l();
  else if (key == "weight_clip") cfg.weight_clip = to_d();
  else if (key == "loss_mix") cfg.loss_mix = to_d();
  else if (key == "grid") cfg.grid = to_i();
  else if (key == "episode_len") cfg.episode_len = to_i();
  else if (key == "episodes_per_task") cfg.episodes_per_task = to_i();
  else if (key == "tasks") cfg.tasks = to_i();
  else if (key == "bo_n") cfg.bo_n = to_i();
  else if (key == "bo_dim") cfg.bo_dim = to_i();
  else if (key == "bo_collect_len") cfg.bo_collect_len = to_i();
  else if (key == "bo_budget") cfg.bo_budget = to_i();
  else if (key == "bo_functions") cfg.bo_functions = to_i();
  else if (key == "bo_trials") cfg.bo_trials = to_i();
  else if (key == "bo_init") cfg.bo_init = to_i();
  else if (key == "eval_tasks") cfg.eval_tasks = to_i();
  else if (key == "kappa") cfg.kappa = to_d();
  else if (key == "temperature") cfg.temperature = to_d();
  else if (key == "dataset") cfg.dataset = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else throw ConfigError("unknown config key: " + key);
}

inline RunConfig parse_config_text(const std::string& text, const RunConfig& base = {}) {
  RunConfig cfg = base;
  // first pass picks up preset/domain so preset values land before other keys
  std::istringstream pre(text);
  std::string line;
  while (std::getline(pre, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key == "preset") cfg.preset = trim(line.substr(eq + 1));
    if (key == "domain") cfg.domain = trim(line.substr(eq + 1));
    if (key == "mode") cfg.mode = trim(line.substr(eq + 1));
  }
  apply_preset(cfg);

  std::istringstream in(text);
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key = value");
    try {
      set_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config_file(const std::string& path, const RunConfig& base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), base);
}

// Token layout + model architecture implied by (mode, domain, geometry).
inline model::ModelConfig model_config_for(const RunConfig& cfg) {
  model::ModelConfig mc;
  mc.trunk.n_layer = cfg.n_layer;
  mc.trunk.n_embd = cfg.n_embd;
  mc.trunk.n_head = cfg.n_head;
  mc.bo_dim = cfg.bo_dim;
  mc.score_hidden = cfg.score_hidden;

  model::TokenLayout& lay = mc.layout;
  if (cfg.is_bo()) {
    lay.bo_mode = true;
    lay.include_ctilde = true;
    lay.include_c = false;
    lay.obs_vocab = 0;
    lay.n_actions = 0;
    lay.max_episode_len = 1;
    lay.max_ctx = 3 * std::max(cfg.bo_collect_len, cfg.bo_budget + cfg.bo_init) + 4;
  } else {
    lay.bo_mode = false;
    lay.include_ctilde = cfg.mode == "icee" || cfg.mode == "icee-biased";
    lay.include_c = cfg.mode != "ad" && cfg.mode != "ad-sorted";
    lay.bins = cfg.bins;
    lay.obs_vocab = cfg.grid * cfg.grid;
    lay.n_actions = env::kNumActions;
    lay.max_episode_len = cfg.episode_len;
    const int episodes = cfg.mode == "mgdt" ? 1 : cfg.episodes_per_task;
    lay.max_ctx = episodes * (cfg.episode_len * lay.action_block() + 1);
  }
  mc.trunk.max_ctx = lay.max_ctx;
  return mc;
}

inline objectives::TrainConfig train_config_for(const RunConfig& cfg) {
  objectives::TrainConfig tc;
  tc.lr = cfg.lr;
  tc.batch_size = cfg.batch_size;
  tc.steps = cfg.steps;
  tc.weight_clip = cfg.weight_clip;
  tc.loss_mix = cfg.loss_mix;
  tc.seed = cfg.seed;
  tc.unbiased = cfg.mode == "icee";
  return tc;
}

}  // namespace icee::harness
