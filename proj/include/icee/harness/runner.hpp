#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "icee/bo/collector.hpp"
#include "icee/bo/ei.hpp"
#include "icee/bo/gp.hpp"
#include "icee/env/gridworld.hpp"
#include "icee/harness/config.hpp"
#include "icee/harness/dataset.hpp"
#include "icee/harness/logio.hpp"
#include "icee/harness/plot.hpp"
#include "icee/harness/stats.hpp"
#include "icee/inference.hpp"
#include "icee/model/checkpoint.hpp"
#include "icee/objectives.hpp"

namespace icee::harness {

inline env::CollectorKind collector_for(const RunConfig& cfg) {
  return cfg.domain == "dark_room_biased" ? env::CollectorKind::biased
                                          : env::CollectorKind::cheating;
}

// Episodes sorted by the collector's epsilon, descending (so late episodes
// tend to have higher returns), then relabeled on the new order.
inline TaskSequence sort_episodes_by_eps(const TaskSequence& seq,
                                         const rtg::BinningSpec& binning) {
  std::vector<std::pair<double, std::vector<StepRecord>>> episodes;
  int offset = 0;
  for (int k = 0; k < seq.episode_count(); ++k) {
    const int len = seq.episode_lengths[k];
    std::vector<StepRecord> ep(seq.steps.begin() + offset, seq.steps.begin() + offset + len);
    episodes.emplace_back(ep.front().log.epsilon, std::move(ep));
    offset += len;
  }
  std::stable_sort(episodes.begin(), episodes.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  TaskSequence out;
  for (auto& [eps, ep] : episodes) {
    out.episode_lengths.push_back(int(ep.size()));
    for (auto& s : ep) out.steps.push_back(s);
  }
  return rtg::relabel_sequence(std::move(out), binning, /*shaping=*/true);
}

inline TaskSequence make_training_sequence(const RunConfig& cfg, const env::GridSpec& spec,
                                           const env::GridTask& task, Rng& rng) {
  const int episodes = cfg.mode == "mgdt" ? 1 : cfg.episodes_per_task;
  TaskSequence seq = env::collect_task(spec, task, episodes, collector_for(cfg), rng);
  if (cfg.mode == "ad-sorted") seq = sort_episodes_by_eps(seq, spec.binning());
  return seq;
}

inline nlohmann::json dataset_header(const RunConfig& cfg) {
  nlohmann::json h;
  h["domain"] = cfg.domain;
  h["mode"] = cfg.mode;
  h["preset"] = cfg.preset;
  h["seed"] = cfg.seed;
  h["tasks"] = cfg.tasks;
  h["shaping"] = true;
  if (!cfg.is_bo()) {
    h["grid"] = cfg.grid;
    h["episode_len"] = cfg.episode_len;
    h["episodes_per_task"] = cfg.mode == "mgdt" ? 1 : cfg.episodes_per_task;
    if (cfg.preset == "desk")
      h["overrides"] = {{"grid", cfg.grid},
                        {"episode_len", cfg.episode_len},
                        {"episodes_per_task", cfg.episodes_per_task}};
  } else {
    h["bo_n"] = cfg.bo_n;
    h["bo_dim"] = cfg.bo_dim;
    h["bo_collect_len"] = cfg.bo_collect_len;
  }
  h["fields"] = "step <episode> <t> <obs> <action> <reward> <pi> <eps> <ctilde> <c> <ctok>";
  return h;
}

// ---------------------------------------------------------------------------
// BO training data

struct BoSample {
  std::shared_ptr<CandidateSet> cands;
  TaskSequence seq;
  double gamma = 0.0;
};

inline BoSample sample_bo_training_task(const RunConfig& cfg, Rng& rng) {
  bo::GPSpec spec;
  BoSample sample;
  sample.cands = std::make_shared<CandidateSet>(
      bo::sample_gp_candidates(cfg.bo_n, cfg.bo_dim, spec, rng));
  sample.gamma = rng.uniform(0.0, 10.0);
  for (int t = 0; t < cfg.bo_collect_len; ++t) {
    const auto [idx, prob] = bo::rank_softmax_collector(sample.cands->values, sample.gamma, rng);
    StepRecord rec;
    rec.action = idx;
    rec.reward = -sample.cands->values[idx];
    rec.log = {idx, prob, sample.gamma};
    sample.seq.steps.push_back(rec);
    sample.seq.episode_lengths.push_back(1);
  }
  sample.seq = rtg::relabel_sequence(std::move(sample.seq), {-1.0, 1.0, 2}, false);
  return sample;
}

// ---------------------------------------------------------------------------
// generate

inline std::string dataset_path(const RunConfig& cfg) {
  return cfg.out + "/dataset_" + cfg.mode + "_" + cfg.domain +
         (cfg.is_bo() ? ".jsonl" : ".txt");
}

inline std::string generate(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.is_model_mode())
    throw ConfigError("mode " + cfg.mode + " has no training data to generate");
  std::filesystem::create_directories(cfg.out);
  const std::string path = dataset_path(cfg);

  if (cfg.is_bo()) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open dataset for writing: " + path);
    out << kDatasetMagic << dataset_header(cfg).dump() << "\n";
    Rng rng(derive_seed(cfg.seed, "dataset"));
    for (int i = 0; i < cfg.tasks; ++i) {
      const BoSample s = sample_bo_training_task(cfg, rng);
      nlohmann::json j;
      j["gamma"] = s.gamma;
      std::vector<std::vector<double>> locs(s.cands->size());
      for (int r = 0; r < s.cands->size(); ++r)
        for (int c = 0; c < s.cands->dim(); ++c)
          locs[r].push_back(s.cands->locations(r, c));
      j["locations"] = locs;
      j["values"] = std::vector<double>(s.cands->values.data(),
                                        s.cands->values.data() + s.cands->values.size());
      std::vector<int> actions;
      std::vector<double> probs;
      std::vector<int> flags;
      for (const auto& st : s.seq.steps) {
        actions.push_back(st.action);
        probs.push_back(st.log.prob);
        flags.push_back(st.ret.cross_flag);
      }
      j["actions"] = actions;
      j["probs"] = probs;
      j["ctilde"] = flags;
      out << j.dump() << "\n";
    }
    return path;
  }

  const env::GridSpec spec = cfg.grid_spec();
  Dataset ds;
  ds.header = dataset_header(cfg);
  Rng rng(derive_seed(cfg.seed, "dataset"));
  for (int i = 0; i < cfg.tasks; ++i) {
    const env::GridTask task = env::sample_task(spec, rng, false);
    ds.tasks.push_back(task);
    ds.sequences.push_back(make_training_sequence(cfg, spec, task, rng));
  }
  write_dataset(ds, path);
  return path;
}

inline std::vector<BoSample> read_bo_dataset(const std::string& path, const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kDatasetMagic, 0) != 0)
    throw SchemaError("missing dataset header line");
  std::vector<BoSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    BoSample s;
    const auto locs = j.at("locations").get<std::vector<std::vector<double>>>();
    const auto values = j.at("values").get<std::vector<double>>();
    s.cands = std::make_shared<CandidateSet>();
    s.cands->locations.resize(int(locs.size()), cfg.bo_dim);
    s.cands->values.resize(int(values.size()));
    for (size_t r = 0; r < locs.size(); ++r) {
      for (int c = 0; c < cfg.bo_dim; ++c) s.cands->locations(int(r), c) = locs[r][c];
      s.cands->values[int(r)] = values[r];
    }
    s.cands->queried.assign(s.cands->size(), 0);
    s.cands->provenance = "gp-sample";
    s.gamma = j.at("gamma").get<double>();
    const auto actions = j.at("actions").get<std::vector<int>>();
    const auto probs = j.at("probs").get<std::vector<double>>();
    for (size_t t = 0; t < actions.size(); ++t) {
      StepRecord rec;
      rec.action = actions[t];
      rec.reward = -s.cands->values[actions[t]];
      rec.log = {actions[t], probs[t], s.gamma};
      s.seq.steps.push_back(rec);
      s.seq.episode_lengths.push_back(1);
    }
    s.seq = rtg::relabel_sequence(std::move(s.seq), {-1.0, 1.0, 2}, false);
    samples.push_back(std::move(s));
  }
  return samples;
}

// ---------------------------------------------------------------------------
// train

inline std::string checkpoint_path(const RunConfig& cfg) {
  return cfg.out + "/ckpt_" + cfg.mode + "_" + cfg.domain + ".bin";
}

struct TrainResult {
  std::string ckpt_path;
  objectives::StepMetrics last_metrics;
  long steps_done = 0;
};

inline TrainResult train(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.is_model_mode()) throw ConfigError("mode " + cfg.mode + " is not trainable");
  std::filesystem::create_directories(cfg.out);

  const model::ModelConfig mc = model_config_for(cfg);
  model::Checkpoint ckpt;
  long start_step = 0;
  if (!cfg.dataset.empty() && !std::filesystem::exists(cfg.dataset))
    throw IoError("dataset not found: " + cfg.dataset);
  if (!cfg.checkpoint.empty() && std::filesystem::exists(cfg.checkpoint)) {
    ckpt = model::load_checkpoint(cfg.checkpoint);
    if (ckpt.meta.value("mode", "") != cfg.mode ||
        ckpt.meta.value("domain", "") != cfg.domain)
      throw ModeError("checkpoint mode/domain does not match the run configuration");
    start_step = ckpt.meta.value("steps_done", 0L);
  } else {
    ckpt.params.init(mc, cfg.seed);
    ckpt.train_seed = cfg.seed;
  }

  // optional persisted data
  std::optional<Dataset> grid_data;
  std::vector<BoSample> bo_data;
  if (!cfg.dataset.empty()) {
    if (cfg.is_bo())
      bo_data = read_bo_dataset(cfg.dataset, cfg);
    else
      grid_data = read_dataset(cfg.dataset);
  }

  const env::GridSpec spec = cfg.is_bo() ? env::GridSpec{} : cfg.grid_spec();
  const objectives::TrainConfig tc = train_config_for(cfg);
  objectives::TrainScratch<float> scratch;

  JsonlWriter log(cfg.out + "/train_" + cfg.mode + "_" + cfg.domain + ".jsonl",
                  start_step > 0);
  log.write(config_header_json(cfg.resolved(), objectives::env_worker_count()));

  objectives::StepMetrics last;
  for (long step = start_step; step < start_step + cfg.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(derive_seed(cfg.seed, "train-data", uint64_t(step)));
    objectives::TrainBatch batch;
    batch.action_space = cfg.is_bo() ? cfg.bo_n : env::kNumActions;
    for (int b = 0; b < cfg.batch_size; ++b) {
      objectives::TrainSample sample;
      if (cfg.is_bo()) {
        BoSample bs = bo_data.empty()
                          ? sample_bo_training_task(cfg, rng)
                          : bo_data[size_t(rng.uniform_int(int(bo_data.size())))];
        sample.enc = model::encode_task_sequence(bs.seq, mc.layout);
        sample.cands = bs.cands;
      } else if (grid_data.has_value()) {
        const auto& seqs = grid_data->sequences;
        sample.enc = model::encode_task_sequence(
            seqs[size_t(rng.uniform_int(int(seqs.size())))], mc.layout);
      } else {
        const env::GridTask task = env::sample_task(spec, rng, false);
        sample.enc = model::encode_task_sequence(make_training_sequence(cfg, spec, task, rng),
                                                 mc.layout);
      }
      batch.samples.push_back(std::move(sample));
    }
    last = objectives::train_step(ckpt.params, batch, tc, scratch);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.write({{"type", "step"},
               {"step", step},
               {"action_loss", last.action_loss},
               {"return_loss", last.return_loss},
               {"mean_weight", last.mean_weight},
               {"grad_norm", last.grad_norm},
               {"seconds", secs}});
  }
  log.flush();

  ckpt.meta = {{"mode", cfg.mode},
               {"domain", cfg.domain},
               {"preset", cfg.preset},
               {"grid", cfg.grid},
               {"episode_len", cfg.episode_len},
               {"episodes_per_task", cfg.episodes_per_task},
               {"bo_n", cfg.bo_n},
               {"bo_dim", cfg.bo_dim},
               {"steps_done", start_step + cfg.steps},
               {"config", cfg.resolved()}};
  const std::string path = cfg.checkpoint.empty() ? checkpoint_path(cfg) : cfg.checkpoint;
  save_checkpoint(ckpt, path);
  return {path, last, start_step + cfg.steps};
}

// ---------------------------------------------------------------------------
// evaluate (grid)

struct GridEval {
  std::vector<std::vector<double>> rets;  // [episode][task]
  std::vector<std::vector<double>> ents;
  std::string rows_csv, summary_csv;
};

inline std::pair<std::vector<double>, std::vector<double>> run_source_task(
    const env::GridSpec& spec, const env::GridTask& task, int episodes,
    env::CollectorKind kind, Rng& rng) {
  env::GridEnv e(spec, task);
  std::vector<double> rets, ents;
  for (int k = 0; k < episodes; ++k) {
    const double eps = rng.uniform();
    e.reset(rng);
    double ret = 0, ent = 0;
    for (int t = 0; t < spec.episode_len; ++t) {
      const auto probs = kind == env::CollectorKind::cheating
                             ? env::cheating_probs(e, e.collector_target(), eps)
                             : env::biased_probs(e, e.collector_target(), eps);
      double h = 0;
      for (double p : probs)
        if (p > 0) h -= p * std::log(p);
      ent += h;
      const auto [a, prob] = env::sample_policy(probs, rng);
      ret += e.step(a).reward;
    }
    rets.push_back(ret);
    ents.push_back(ent / spec.episode_len);
  }
  return {rets, ents};
}

inline GridEval evaluate_grid(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.is_bo()) throw ModeError("evaluate_grid called with the bo domain");
  std::filesystem::create_directories(cfg.out);
  const env::GridSpec spec = cfg.grid_spec();
  const bool restricted = cfg.domain == "dark_room_biased";
  const int K = cfg.episodes_per_task;

  // evaluation tasks are mode-independent for a given seed
  std::vector<env::GridTask> tasks;
  {
    Rng rng(derive_seed(cfg.seed, "eval-tasks"));
    for (int i = 0; i < cfg.eval_tasks; ++i)
      tasks.push_back(env::sample_task(spec, rng, restricted));
  }

  model::Checkpoint ckpt;
  const bool needs_model = cfg.is_model_mode();
  if (needs_model) {
    const std::string path = cfg.checkpoint.empty() ? checkpoint_path(cfg) : cfg.checkpoint;
    if (!std::filesystem::exists(path))
      throw ModeError("missing checkpoint for model mode: " + path);
    ckpt = model::load_checkpoint(path);
    if (ckpt.meta.value("mode", "") != cfg.mode ||
        ckpt.meta.value("domain", "") != cfg.domain)
      throw ModeError("checkpoint mode/domain does not match the evaluation");
  }

  GridEval ev;
  ev.rets.assign(K, std::vector<double>(cfg.eval_tasks, 0.0));
  ev.ents.assign(K, std::vector<double>(cfg.eval_tasks, 0.0));
  std::vector<std::vector<infer::StepTrace>> traces(cfg.eval_tasks);

  const int workers = objectives::env_worker_count();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < cfg.eval_tasks; ++i) {
    if (needs_model) {
      infer::InferenceConfig icfg;
      icfg.kappa = cfg.kappa;
      icfg.temperature = cfg.temperature;
      icfg.episodes = K;
      const auto records =
          infer::run_task(ckpt.params, spec, tasks[i], icfg,
                          derive_seed(cfg.seed, "eval-task", uint64_t(i)),
                          cfg.mode == "mgdt", &traces[i]);
      for (int k = 0; k < K; ++k) {
        ev.rets[k][i] = records[k].ret;
        ev.ents[k][i] = records[k].mean_entropy;
      }
    } else {  // source
      Rng rng(derive_seed(cfg.seed, "eval-task", uint64_t(i)));
      const auto [rets, ents] =
          run_source_task(spec, tasks[i], K, collector_for(cfg), rng);
      for (int k = 0; k < K; ++k) {
        ev.rets[k][i] = rets[k];
        ev.ents[k][i] = ents[k];
      }
    }
  }

  // per-row CSV, summary CSV, and the evaluation step log
  CsvTable rows;
  rows.columns = {"mode", "task", "episode", "ret", "entropy"};
  for (int i = 0; i < cfg.eval_tasks; ++i)
    for (int k = 0; k < K; ++k)
      rows.rows.push_back({cfg.mode, std::to_string(i), std::to_string(k),
                           std::to_string(ev.rets[k][i]), std::to_string(ev.ents[k][i])});
  ev.rows_csv = cfg.out + "/eval_" + cfg.mode + "_" + cfg.domain + ".csv";
  write_csv(rows, ev.rows_csv);

  CsvTable summary;
  summary.columns = {"mode", "episode", "mean_return", "ret_ci95", "mean_entropy",
                     "ent_ci95"};
  for (int k = 0; k < K; ++k)
    summary.rows.push_back({cfg.mode, std::to_string(k), std::to_string(mean_of(ev.rets[k])),
                            std::to_string(ci95_halfwidth(ev.rets[k])),
                            std::to_string(mean_of(ev.ents[k])),
                            std::to_string(ci95_halfwidth(ev.ents[k]))});
  ev.summary_csv = cfg.out + "/eval_" + cfg.mode + "_" + cfg.domain + "_summary.csv";
  write_csv(summary, ev.summary_csv);

  if (needs_model) {
    JsonlWriter elog(cfg.out + "/evallog_" + cfg.mode + "_" + cfg.domain + ".jsonl");
    elog.write(config_header_json(cfg.resolved(), workers));
    for (int i = 0; i < cfg.eval_tasks; ++i)
      for (const auto& t : traces[i])
        elog.write({{"type", "step"},
                    {"task", i},
                    {"episode", t.episode},
                    {"t", t.t},
                    {"action", t.action},
                    {"reward", t.reward},
                    {"entropy", t.entropy},
                    {"c_token", t.sampled_c_token}});
  }
  return ev;
}

// ---------------------------------------------------------------------------
// evaluate (BO)

struct BoEval {
  std::vector<std::vector<double>> gaps;     // [step][run]
  std::vector<std::vector<double>> seconds;  // [step][run]
  std::string rows_csv, summary_csv;
};

inline std::vector<infer::BoStep> run_gp_ei(const CandidateSet& base, int budget,
                                            const std::vector<int>& initial,
                                            const bo::GPSpec& spec) {
  CandidateSet cands = base;
  cands.queried.assign(cands.size(), 0);
  const double true_min = cands.values.minCoeff();
  std::vector<infer::BoStep> out;
  double best = std::numeric_limits<double>::infinity();
  Matd X(budget, cands.dim());
  Vecd y(budget);
  auto observe = [&](int idx, double secs) {
    const int m = int(out.size());
    X.row(m) = cands.locations.row(idx);
    y[m] = cands.values[idx];
    cands.queried[idx] = 1;
    best = std::min(best, cands.values[idx]);
    out.push_back({idx, cands.values[idx], best, best - true_min, secs});
  };
  for (size_t i = 0; i < initial.size() && int(out.size()) < budget; ++i)
    observe(initial[i], 0.0);
  while (int(out.size()) < budget) {
    const int m = int(out.size());
    const auto t0 = std::chrono::steady_clock::now();
    const int idx = bo::gp_ei_suggest(X.topRows(m), y.head(m), cands, spec);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    observe(idx, secs);
  }
  return out;
}

inline std::vector<infer::BoStep> run_random_search(const CandidateSet& base, int budget,
                                                    const std::vector<int>& initial,
                                                    Rng& rng) {
  CandidateSet cands = base;
  cands.queried.assign(cands.size(), 0);
  const double true_min = cands.values.minCoeff();
  std::vector<infer::BoStep> out;
  double best = std::numeric_limits<double>::infinity();
  auto observe = [&](int idx, double secs) {
    cands.queried[idx] = 1;
    best = std::min(best, cands.values[idx]);
    out.push_back({idx, cands.values[idx], best, best - true_min, secs});
  };
  for (size_t i = 0; i < initial.size() && int(out.size()) < budget; ++i)
    observe(initial[i], 0.0);
  while (int(out.size()) < budget) {
    const auto t0 = std::chrono::steady_clock::now();
    int idx = rng.uniform_int(cands.size());
    while (cands.queried[idx]) idx = rng.uniform_int(cands.size());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    observe(idx, secs);
  }
  return out;
}

inline BoEval evaluate_bo(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.is_bo()) throw ModeError("evaluate_bo called with a grid domain");
  std::filesystem::create_directories(cfg.out);
  const int runs = cfg.bo_functions * cfg.bo_trials;
  const int budget = cfg.bo_budget;

  model::Checkpoint ckpt;
  const bool needs_model = cfg.mode == "icee" || cfg.mode == "icee-biased";
  if (needs_model) {
    const std::string path = cfg.checkpoint.empty() ? checkpoint_path(cfg) : cfg.checkpoint;
    if (!std::filesystem::exists(path))
      throw ModeError("missing checkpoint for model mode: " + path);
    ckpt = model::load_checkpoint(path);
    if (ckpt.meta.value("mode", "") != cfg.mode || ckpt.meta.value("domain", "") != cfg.domain)
      throw ModeError("checkpoint mode/domain does not match the evaluation");
  }

  BoEval ev;
  ev.gaps.assign(budget, std::vector<double>(runs, 0.0));
  ev.seconds.assign(budget, std::vector<double>(runs, 0.0));
  std::vector<std::vector<infer::BoStep>> all(runs);

  const int workers = objectives::env_worker_count();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int r = 0; r < runs; ++r) {
    const int f = r / cfg.bo_trials;
    const int trial = r % cfg.bo_trials;
    bo::GPSpec gspec;
    Rng frng(derive_seed(cfg.seed, "bo-eval-fn", uint64_t(f)));
    CandidateSet cands = bo::sample_gp_candidates(cfg.bo_n, cfg.bo_dim, gspec, frng,
                                                  uint64_t(f));
    Rng irng(derive_seed(cfg.seed, "bo-init", uint64_t(f) * 1000 + uint64_t(trial)));
    const std::vector<int> initial =
        infer::sample_initial_design(cands.size(), cfg.bo_init, irng);

    if (needs_model) {
      infer::InferenceConfig icfg;
      icfg.kappa = cfg.kappa;
      icfg.temperature = cfg.temperature;
      all[r] = infer::run_bo(ckpt.params, cands, budget, icfg,
                             derive_seed(cfg.seed, "bo-run", uint64_t(r)), initial);
    } else if (cfg.mode == "gp-ei") {
      all[r] = run_gp_ei(cands, budget, initial, gspec);
    } else if (cfg.mode == "random") {
      Rng rng(derive_seed(cfg.seed, "bo-run", uint64_t(r)));
      all[r] = run_random_search(cands, budget, initial, rng);
    } else {
      throw ModeError("mode " + cfg.mode + " is not a BO evaluation mode");
    }
  }

  CsvTable rows;
  rows.columns = {"mode", "function", "trial", "step", "index",
                  "value", "best",     "gap",   "seconds"};
  for (int r = 0; r < runs; ++r) {
    for (int s = 0; s < budget; ++s) {
      const infer::BoStep& st = all[r][s];
      ev.gaps[s][r] = st.gap;
      ev.seconds[s][r] = st.seconds;
      rows.rows.push_back({cfg.mode, std::to_string(r / cfg.bo_trials),
                           std::to_string(r % cfg.bo_trials), std::to_string(s),
                           std::to_string(st.index), std::to_string(st.value),
                           std::to_string(st.best), std::to_string(st.gap),
                           std::to_string(st.seconds)});
    }
  }
  ev.rows_csv = cfg.out + "/bo_" + cfg.mode + ".csv";
  write_csv(rows, ev.rows_csv);

  CsvTable summary;
  summary.columns = {"mode", "step", "mean_gap", "gap_ci95", "mean_seconds"};
  for (int s = 0; s < budget; ++s)
    summary.rows.push_back({cfg.mode, std::to_string(s), std::to_string(mean_of(ev.gaps[s])),
                            std::to_string(ci95_halfwidth(ev.gaps[s])),
                            std::to_string(mean_of(ev.seconds[s]))});
  ev.summary_csv = cfg.out + "/bo_" + cfg.mode + "_summary.csv";
  write_csv(summary, ev.summary_csv);
  return ev;
}

// ---------------------------------------------------------------------------
// plot

inline std::vector<std::string> plot(const std::vector<std::string>& csvs,
                                     const std::string& out_dir) {
  if (csvs.empty()) throw InputError("plot: no CSV files given");
  std::filesystem::create_directories(out_dir);
  bool grid = false, bo = false;
  std::vector<Series> ret_series, ent_series, gap_series, time_series;

  for (const auto& path : csvs) {
    const CsvTable t = read_csv(path);
    const bool is_grid =
        std::count(t.columns.begin(), t.columns.end(), "mean_return") > 0;
    const bool is_bo = std::count(t.columns.begin(), t.columns.end(), "mean_gap") > 0;
    if (!is_grid && !is_bo)
      throw SchemaError("CSV is neither a grid nor a BO summary: " + path);
    if (t.rows.empty()) throw SchemaError("summary CSV has no rows: " + path);
    grid |= is_grid;
    bo |= is_bo;
    const int mode_col = t.col("mode");

    std::vector<std::string> modes;
    for (const auto& row : t.rows)
      if (std::find(modes.begin(), modes.end(), row[mode_col]) == modes.end())
        modes.push_back(row[mode_col]);

    for (const auto& mode : modes) {
      if (is_grid) {
        Series ret{mode}, ent{mode};
        const int ep = t.col("episode"), mr = t.col("mean_return"), rc = t.col("ret_ci95");
        const int me = t.col("mean_entropy"), ec = t.col("ent_ci95");
        for (size_t i = 0; i < t.rows.size(); ++i) {
          if (t.rows[i][mode_col] != mode) continue;
          const double x = t.num(i, ep) + 1;
          ret.x.push_back(x);
          ret.y.push_back(t.num(i, mr));
          ret.lo.push_back(t.num(i, mr) - t.num(i, rc));
          ret.hi.push_back(t.num(i, mr) + t.num(i, rc));
          ent.x.push_back(x);
          ent.y.push_back(t.num(i, me));
          ent.lo.push_back(t.num(i, me) - t.num(i, ec));
          ent.hi.push_back(t.num(i, me) + t.num(i, ec));
        }
        ret_series.push_back(std::move(ret));
        ent_series.push_back(std::move(ent));
      } else {
        Series gap{mode}, tm{mode};
        const int st = t.col("step"), mg = t.col("mean_gap"), gc = t.col("gap_ci95");
        const int ms = t.col("mean_seconds");
        double elapsed = 0;
        for (size_t i = 0; i < t.rows.size(); ++i) {
          if (t.rows[i][mode_col] != mode) continue;
          const double x = t.num(i, st) + 1;
          gap.x.push_back(x);
          gap.y.push_back(t.num(i, mg));
          gap.lo.push_back(t.num(i, mg) - t.num(i, gc));
          gap.hi.push_back(t.num(i, mg) + t.num(i, gc));
          elapsed += t.num(i, ms);
          tm.x.push_back(elapsed);
          tm.y.push_back(t.num(i, mg));
        }
        gap_series.push_back(std::move(gap));
        time_series.push_back(std::move(tm));
      }
    }
  }
  if (grid && bo) throw SchemaError("cannot mix grid and BO summaries in one plot call");

  std::vector<std::string> outputs;
  if (grid) {
    const std::string f1 = out_dir + "/return_vs_episode.svg";
    write_line_plot(f1, "Mean return by episode", "episode", "mean return", ret_series);
    const std::string f2 = out_dir + "/entropy_vs_episode.svg";
    write_line_plot(f2, "Action entropy by episode", "episode", "mean entropy", ent_series);
    outputs = {f1, f2};
  } else {
    const std::string f1 = out_dir + "/gap_vs_evaluations.svg";
    write_line_plot(f1, "Gap to minimum by evaluations", "function evaluations", "mean gap",
                    gap_series);
    const std::string f2 = out_dir + "/gap_vs_time.svg";
    write_line_plot(f2, "Gap to minimum by elapsed time", "seconds", "mean gap",
                    time_series);
    outputs = {f1, f2};
  }
  return outputs;
}

}  // namespace icee::harness
