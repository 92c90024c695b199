#pragma once

// Inference-time policy learning: act for K episodes with frozen parameters,
// conditioning every step on cross-flag 1 and a return-to-go sampled from the
// return model's augmented distribution, then overwrite the finished
// episode's conditioning with the ground truth.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "icee/common.hpp"
#include "icee/env/gridworld.hpp"
#include "icee/model/model.hpp"
#include "icee/rng.hpp"
#include "icee/rtg.hpp"

namespace icee::infer {

struct InferenceConfig {
  double kappa = 5.0;        // return-augmentation exponent
  double temperature = 1.0;  // action sampling temperature
  int episodes = 20;         // K
  double weight_floor = 1e-6;
  uint64_t seed = 0;

  void validate() const {
    if (kappa < 0) throw ConfigError("kappa must be nonnegative");
    if (weight_floor <= 0) throw ConfigError("augmentation floor must be positive");
    if (temperature <= 0) throw ConfigError("temperature must be positive");
  }
};

struct SampledReturn {
  double value = 0.0;
  int token = 0;
};

// q(c) proportional to p(c) * max(((c - c_min)/(c_max - c_min))^kappa, floor)
// over the bin centers.
inline SampledReturn sample_step_rtg(const Vecd& bin_probs, const rtg::BinningSpec& spec,
                                     double kappa, double floor, Rng& rng) {
  spec.validate();
  if (int(bin_probs.size()) != spec.bins) throw ShapeError("bin probability size mismatch");
  Vecd q(spec.bins);
  for (int b = 0; b < spec.bins; ++b) {
    const double c = rtg::detokenize_return(b, spec);
    const double frac = (c - spec.c_min) / (spec.c_max - spec.c_min);
    q[b] = bin_probs[b] * std::max(std::pow(frac, kappa), floor);
  }
  const double z = q.sum();
  if (!(z > 0)) throw NumericError("augmented return distribution has zero mass");
  q /= z;
  std::vector<double> w(q.data(), q.data() + q.size());
  const int token = rng.categorical(w);
  return {rtg::detokenize_return(token, spec), token};
}

// Normalized q for the dominance property tests.
inline Vecd augmented_return_distribution(const Vecd& bin_probs, const rtg::BinningSpec& spec,
                                          double kappa, double floor) {
  Vecd q(spec.bins);
  for (int b = 0; b < spec.bins; ++b) {
    const double c = rtg::detokenize_return(b, spec);
    const double frac = (c - spec.c_min) / (spec.c_max - spec.c_min);
    q[b] = bin_probs[b] * std::max(std::pow(frac, kappa), floor);
  }
  return q / q.sum();
}

template <typename S>
inline Vecd softmax_row(const nn::Mat<S>& logits, int row, double temperature) {
  Vecd p(logits.cols());
  double mx = -1e300;
  for (int j = 0; j < logits.cols(); ++j)
    mx = std::max(mx, double(logits(row, j)) / temperature);
  double z = 0;
  for (int j = 0; j < logits.cols(); ++j) {
    p[j] = std::exp(double(logits(row, j)) / temperature - mx);
    z += p[j];
  }
  return p / z;
}

inline double shannon_entropy(const Vecd& p) {
  double h = 0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] > 0) h -= p[i] * std::log(p[i]);
  return h;
}

struct EpisodeRecord {
  double ret = 0.0;
  double mean_entropy = 0.0;
};

struct StepTrace {
  int episode = 0;
  int t = 0;
  int action = 0;
  double reward = 0.0;
  double entropy = 0.0;
  int sampled_c_token = -1;
};

// In-context rollout over one grid task. Keeps the relabeled history of
// completed episodes plus the sampled conditioning of the episode in flight.
class GridRollout {
 public:
  GridRollout(const model::ModelParams<float>& params, env::GridSpec spec,
              env::GridTask task, InferenceConfig cfg)
      : params_(params), spec_(spec), cfg_(cfg), env_(spec, task) {
    cfg_.validate();
    layout_ = params.cfg.layout;
    va_ = model::action_vocab(layout_);
    vr_ = model::return_vocab(layout_);
    binning_ = spec_.binning();
    if (layout_.include_c && layout_.bins != binning_.bins)
      throw ConfigError("model bin count does not match the environment binning");
  }

  EpisodeRecord run_episode(Rng& rng, std::vector<StepTrace>* trace = nullptr) {
    fit_context_budget();
    const model::EncodedTask base = model::encode_task_sequence(history_, layout_);

    struct Partial {
      int c_token = 0;
      int obs = 0;
      int action = 0;
      int reward_tok = 0;
    };
    std::vector<Partial> partial;
    std::vector<double> rewards;
    double entropy_acc = 0.0;

    int obs = env_.reset(rng);
    for (int t = 0; t < spec_.episode_len; ++t) {
      int c_token = 0;
      if (layout_.include_c) {
        model::Stream rs = base.return_stream;
        for (const Partial& ps : partial) append_return_block(rs, ps);
        if (layout_.include_ctilde) rs.push_back({model::Token::kDisc, vr_.ctilde(1), 0});
        rs.push_back({model::Token::kDisc, vr_.obs(obs), 0});
        const auto rlogits = model::forward_return(params_, rs, ws_);
        const Vecd probs = softmax_row(rlogits, int(rs.size()) - 1, 1.0);
        const SampledReturn sr =
            sample_step_rtg(probs, binning_, cfg_.kappa, cfg_.weight_floor, rng);
        c_token = sr.token;
      }

      model::Stream as = base.action_stream;
      for (const Partial& ps : partial) append_action_block(as, ps);
      if (layout_.include_ctilde) as.push_back({model::Token::kDisc, va_.ctilde(1), 0});
      if (layout_.include_c) as.push_back({model::Token::kDisc, va_.cbin(c_token), 0});
      as.push_back({model::Token::kDisc, va_.obs(obs), 0});
      const auto alogits = model::forward_action(params_, as, nullptr, ws_);
      const Vecd probs = softmax_row(alogits, int(as.size()) - 1, cfg_.temperature);
      entropy_acc += shannon_entropy(probs);
      std::vector<double> w(probs.data(), probs.data() + probs.size());
      const int action = rng.categorical(w);

      const env::StepResult res = env_.step(action);
      partial.push_back({c_token, obs, action, res.reward != 0.0 ? 1 : 0});
      rewards.push_back(res.reward);
      if (trace != nullptr)
        trace->push_back({history_.episode_count(), t, action, res.reward,
                          shannon_entropy(probs), layout_.include_c ? c_token : -1});
      obs = res.obs;
    }

    // fold the finished episode into the history and relabel with the truth
    for (size_t i = 0; i < partial.size(); ++i) {
      StepRecord rec;
      rec.obs = partial[i].obs;
      rec.action = partial[i].action;
      rec.reward = rewards[i];
      rec.log = {partial[i].action, 1.0, 0.0};
      history_.steps.push_back(rec);
    }
    history_.episode_lengths.push_back(int(partial.size()));
    history_ = rtg::relabel_sequence(std::move(history_), binning_, /*shaping=*/true);

    EpisodeRecord rec;
    for (double r : rewards) rec.ret += r;
    rec.mean_entropy = entropy_acc / double(spec_.episode_len);
    return rec;
  }

  const TaskSequence& history() const { return history_; }
  void clear_history() { history_ = TaskSequence{}; }
  int dropped_episodes() const { return dropped_; }

 private:
  void append_return_block(model::Stream& rs, const auto& ps) const {
    if (layout_.include_ctilde) rs.push_back({model::Token::kDisc, vr_.ctilde(1), 0});
    rs.push_back({model::Token::kDisc, vr_.obs(ps.obs), 0});
    rs.push_back({model::Token::kDisc, vr_.act(ps.action), 0});
    rs.push_back({model::Token::kDisc, vr_.rew(ps.reward_tok), 0});
  }
  void append_action_block(model::Stream& as, const auto& ps) const {
    if (layout_.include_ctilde) as.push_back({model::Token::kDisc, va_.ctilde(1), 0});
    if (layout_.include_c) as.push_back({model::Token::kDisc, va_.cbin(ps.c_token), 0});
    as.push_back({model::Token::kDisc, va_.obs(ps.obs), 0});
    as.push_back({model::Token::kDisc, va_.act(ps.action), 0});
    as.push_back({model::Token::kDisc, va_.rew(ps.reward_tok), 0});
  }

  // Drop whole earliest episodes (never partial ones) until the upcoming
  // episode fits in the context window.
  void fit_context_budget() {
    const int need = spec_.episode_len * layout_.action_block() + 1;
    while (true) {
      const int used = history_.total_steps() * layout_.action_block() +
                       history_.episode_count();  // boundary tokens
      if (used + need <= layout_.max_ctx || history_.episode_count() == 0) break;
      const int first_len = history_.episode_lengths.front();
      history_.steps.erase(history_.steps.begin(), history_.steps.begin() + first_len);
      history_.episode_lengths.erase(history_.episode_lengths.begin());
      ++dropped_;
      if (dropped_ == 1)
        std::fprintf(stderr, "warning: context overflow, dropping earliest episodes\n");
    }
  }

  const model::ModelParams<float>& params_;
  env::GridSpec spec_;
  InferenceConfig cfg_;
  env::GridEnv env_;
  model::TokenLayout layout_;
  model::VocabMap va_, vr_;
  rtg::BinningSpec binning_;
  TaskSequence history_;
  model::ModelWorkspace<float> ws_;
  int dropped_ = 0;
};

// Acts for cfg.episodes consecutive episodes on one task. No parameter
// mutation anywhere on this path. `reset_history_each_episode` serves the
// single-episode baseline, which cannot carry cross-episode context.
inline std::vector<EpisodeRecord> run_task(const model::ModelParams<float>& params,
                                           const env::GridSpec& spec, const env::GridTask& task,
                                           const InferenceConfig& cfg, uint64_t seed,
                                           bool reset_history_each_episode = false,
                                           std::vector<StepTrace>* trace = nullptr) {
  GridRollout rollout(params, spec, task, cfg);
  Rng rng(derive_seed(seed, "run-task"));
  std::vector<EpisodeRecord> records;
  for (int k = 0; k < cfg.episodes; ++k) {
    if (reset_history_each_episode) rollout.clear_history();
    records.push_back(rollout.run_episode(rng, trace));
  }
  return records;
}

// ---------------------------------------------------------------------------
// discrete BO inference loop

struct BoStep {
  int index = -1;
  double value = 0.0;
  double best = 0.0;
  double gap = 0.0;
  double seconds = 0.0;  // suggestion time only
};

// Initial-design helper shared by every BO method so paired runs start from
// the same observations.
inline std::vector<int> sample_initial_design(int n_candidates, int k, Rng& rng) {
  std::vector<int> picked;
  std::vector<char> used(n_candidates, 0);
  while (int(picked.size()) < std::min(k, n_candidates)) {
    const int idx = rng.uniform_int(n_candidates);
    if (used[idx]) continue;
    used[idx] = 1;
    picked.push_back(idx);
  }
  return picked;
}

// Each query is one episode: condition on cross-flag 1, score the candidates,
// sample among the unqueried ones, then relabel the flag with the truth.
inline std::vector<BoStep> run_bo(const model::ModelParams<float>& params, CandidateSet cands,
                                  int budget, const InferenceConfig& cfg, uint64_t seed,
                                  const std::vector<int>& initial = {}) {
  cfg.validate();
  cands.validate();
  if (!params.cfg.layout.bo_mode) throw ModeError("run_bo needs a BO-mode model");
  if (budget > cands.size()) throw InputError("budget exceeds the candidate count");
  Rng rng(derive_seed(seed, "run-bo"));
  const model::VocabMap va = model::action_vocab(params.cfg.layout);
  model::ModelWorkspace<float> ws;

  const double true_min = cands.values.minCoeff();
  cands.queried.assign(cands.size(), 0);
  TaskSequence hist;
  std::vector<BoStep> out;
  double best = std::numeric_limits<double>::infinity();

  auto observe = [&](int idx, double seconds) {
    const double value = cands.values[idx];
    cands.queried[idx] = 1;
    best = std::min(best, value);
    StepRecord rec;
    rec.action = idx;
    rec.reward = -value;  // improvement = new lowest value
    rec.log = {idx, 1.0, 0.0};
    hist.steps.push_back(rec);
    hist.episode_lengths.push_back(1);
    hist = rtg::relabel_sequence(std::move(hist), {-1.0, 1.0, 2}, /*shaping=*/false);
    out.push_back({idx, value, best, best - true_min, seconds});
  };

  for (size_t i = 0; i < initial.size() && int(out.size()) < budget; ++i)
    observe(initial[i], 0.0);

  while (int(out.size()) < budget) {
    const auto t0 = std::chrono::steady_clock::now();
    model::EncodedTask enc = model::encode_task_sequence(hist, params.cfg.layout);
    model::Stream as = enc.action_stream;
    as.push_back({model::Token::kDisc, va.ctilde(1), 0});
    const int last = int(as.size()) - 1;
    const std::vector<int> rows{last};
    const auto logits = model::forward_action(params, as, &cands, ws, &rows);

    Vecd masked(cands.size());
    for (int j = 0; j < cands.size(); ++j)
      masked[j] = cands.queried[j] ? -std::numeric_limits<double>::infinity()
                                   : double(logits(last, j)) / cfg.temperature;
    const double mx = masked.maxCoeff();
    Vecd probs = (masked.array() - mx).exp();
    probs = (probs.array().isFinite()).select(probs, 0.0);
    probs /= probs.sum();
    std::vector<double> w(probs.data(), probs.data() + probs.size());
    const int idx = rng.categorical(w);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    observe(idx, seconds);
  }
  return out;
}

}  // namespace icee::infer
