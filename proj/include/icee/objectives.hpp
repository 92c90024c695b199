#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "icee/common.hpp"
#include "icee/model/model.hpp"

namespace icee::objectives {

struct TrainConfig {
  double lr = 1e-5;  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 8;
  long steps = 1000;
  double weight_clip = 20.0;  // ceiling on the importance weights
  double loss_mix = 1.0;      // return-loss coefficient in the joint loss
  uint64_t seed = 0;
  bool unbiased = true;  // false drops the importance weights (biased variants)
  // the clipped importance weights leave heavy-tailed gradients; clip the
  // global norm and ramp the learning rate to keep Adam stable
  double grad_clip = 1.0;  // 0 disables
  long warmup_steps = 100;
  bool cosine_decay = true;  // decay to 10% of lr across `steps`

  void validate() const {
    if (!(lr > 0)) throw ConfigError("learning rate must be positive");
    if (weight_clip < 1) throw ConfigError("weight clip ceiling must be >= 1");
    if (batch_size < 1 || steps < 0) throw ConfigError("invalid batch/step counts");
    if (grad_clip < 0) throw ConfigError("grad_clip must be nonnegative");
  }

  double lr_at(long step) const {
    double scale = 1.0;
    if (warmup_steps > 0 && step < warmup_steps)
      scale = double(step + 1) / double(warmup_steps);
    else if (cosine_decay && steps > 0) {
      const double frac = std::min(1.0, double(step) / double(std::max<long>(steps, 1)));
      scale = 0.1 + 0.45 * (1.0 + std::cos(M_PI * frac));
    }
    return lr * scale;
  }
};

// One training example: the encoded streams plus (BO mode) its candidate set.
struct TrainSample {
  model::EncodedTask enc;
  std::shared_ptr<CandidateSet> cands;
};

struct TrainBatch {
  std::vector<TrainSample> samples;
  int action_space = 5;  // |A|; defines U(a) = 1/|A|

  void validate() const {
    if (samples.empty()) throw InputError("empty train batch");
    if (action_space < 2) throw DataError("action space must have at least 2 actions");
  }
};

namespace detail {

// Row-wise softmax cross-entropy with per-row weights. Adds w * (logZ -
// logit[target]) per masked row; when dlogits != nullptr also writes
// w * grad_scale * (softmax - onehot) into the corresponding rows.
template <typename S>
inline double weighted_ce_rows(const nn::Mat<S>& logits, const std::vector<int>& rows,
                               const std::vector<int>& targets,
                               const std::vector<double>& weights, double grad_scale,
                               nn::Mat<S>* dlogits) {
  if (rows.size() != targets.size()) throw ShapeError("mask/target length mismatch");
  double loss_sum = 0.0;
  VecX<S> p;
  for (size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    const int tgt = targets[i];
    if (tgt < 0 || tgt >= logits.cols()) throw DataError("target index out of range");
    const auto row = logits.row(r);
    const S mx = row.maxCoeff();
    p = (row.array() - mx).exp().transpose();
    const S z = p.sum();
    const double w = weights[i];
    loss_sum += w * (std::log(double(z)) + double(mx) - double(row[tgt]));
    if (dlogits != nullptr) {
      p /= z;
      p[tgt] -= S(1);
      dlogits->row(r) += (p * S(w * grad_scale)).transpose();
    }
  }
  return loss_sum;
}

}  // namespace detail

// Importance weights U(a)/pi clipped at the ceiling; a uniform behavior
// policy gives weights exactly 1 (pre-clipping identity with plain CE).
inline std::vector<double> importance_weights(const std::vector<double>& behavior_probs,
                                              int action_space, double clip) {
  std::vector<double> w(behavior_probs.size());
  const double uniform = 1.0 / double(action_space);
  for (size_t i = 0; i < w.size(); ++i) {
    const double pi = behavior_probs[i];
    if (!(pi > 0.0) || pi > 1.0)
      throw DataError("logged behavior probability must lie in (0, 1]");
    w[i] = std::min(uniform / pi, clip);
  }
  return w;
}

struct ActionLossResult {
  double loss = 0.0;
  std::vector<double> weights;
  double mean_weight = 1.0;
};

// Eq-7 style loss on one encoded sample: -(1/M) sum of w * log p(target),
// with M supplied by the caller (total masked positions across the batch).
template <typename S>
inline double action_loss_sample(const nn::Mat<S>& logits, const model::EncodedTask& enc,
                                 int action_space, double clip, bool unbiased,
                                 double inv_M, nn::Mat<S>* dlogits,
                                 std::vector<double>* weights_out = nullptr) {
  std::vector<double> w;
  if (unbiased) {
    w = importance_weights(enc.behavior_probs, action_space, clip);
  } else {
    for (double pi : enc.behavior_probs) {
      if (!(pi > 0.0)) throw DataError("logged behavior probability must lie in (0, 1]");
      w.push_back(1.0);
    }
  }
  if (weights_out != nullptr) *weights_out = w;
  return detail::weighted_ce_rows(logits, enc.action_pos, enc.action_targets, w, inv_M,
                                  dlogits) *
         inv_M;
}

// Batch-level view: loss plus the per-step clipped weights.
template <typename S>
inline ActionLossResult unbiased_action_loss(const TrainBatch& batch,
                                             const std::vector<nn::Mat<S>>& logits,
                                             double clip, bool unbiased = true) {
  batch.validate();
  if (logits.size() != batch.samples.size())
    throw ShapeError("one logits matrix per sample required");
  size_t M = 0;
  for (const auto& s : batch.samples) M += s.enc.action_pos.size();
  if (M == 0) throw InputError("batch has no masked action positions");
  ActionLossResult res;
  const double inv_M = 1.0 / double(M);
  for (size_t i = 0; i < batch.samples.size(); ++i) {
    std::vector<double> w;
    res.loss += action_loss_sample(logits[i], batch.samples[i].enc, batch.action_space,
                                   clip, unbiased, inv_M, (nn::Mat<S>*)nullptr, &w);
    res.weights.insert(res.weights.end(), w.begin(), w.end());
  }
  double sum_w = 0.0;
  for (double w : res.weights) sum_w += w;
  res.mean_weight = sum_w / double(res.weights.size());
  return res;
}

// Plain cross-entropy over the masked return positions.
template <typename S>
inline double return_model_loss(const nn::Mat<S>& logits, const model::EncodedTask& enc,
                                double inv_M, nn::Mat<S>* dlogits = nullptr) {
  const std::vector<double> ones(enc.return_pos.size(), 1.0);
  return detail::weighted_ce_rows(logits, enc.return_pos, enc.return_targets, ones, inv_M,
                                  dlogits) *
         inv_M;
}

struct StepMetrics {
  double action_loss = 0.0;
  double return_loss = 0.0;
  double mean_weight = 1.0;
  double grad_norm = 0.0;
};

// Per-thread reusable buffers for train_step.
template <typename S>
struct TrainScratch {
  std::vector<model::ModelParams<S>> grads;      // one per worker
  std::vector<model::ModelWorkspace<S>> spaces;  // one per worker
  nn::AdamState<S> adam;

  void ensure(const model::ModelParams<S>& params, int workers) {
    if (int(grads.size()) == workers) return;
    grads.resize(workers);
    spaces.resize(workers);
    for (auto& g : grads) g.zero_like(const_cast<model::ModelParams<S>&>(params));
  }
};

inline int env_worker_count() {
#ifdef _OPENMP
  if (const char* env = std::getenv("ICEE_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// One joint gradient step on the action and return models. Gradients are
// reduced over workers in a fixed order, so results do not depend on thread
// scheduling for a given worker count.
template <typename S>
inline StepMetrics train_step(model::ModelParams<S>& params, const TrainBatch& batch,
                              const TrainConfig& cfg, TrainScratch<S>& scratch) {
  batch.validate();
  cfg.validate();
  const int n = int(batch.samples.size());
  const int workers = std::min(env_worker_count(), n);
  scratch.ensure(params, workers);
  for (auto& g : scratch.grads) g.set_zero();

  size_t M_a = 0, M_r = 0;
  for (const auto& s : batch.samples) {
    M_a += s.enc.action_pos.size();
    M_r += s.enc.return_pos.size();
  }
  if (M_a == 0) throw InputError("batch has no masked action positions");
  const double inv_Ma = 1.0 / double(M_a);
  const double inv_Mr = M_r > 0 ? 1.0 / double(M_r) : 0.0;

  std::vector<double> action_losses(n, 0.0), return_losses(n, 0.0), weight_sums(n, 0.0);

#pragma omp parallel for schedule(static) num_threads(workers)
  for (int i = 0; i < n; ++i) {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
#else
    const int tid = 0;
#endif
    auto& ws = scratch.spaces[tid];
    auto& G = scratch.grads[tid];
    const TrainSample& sample = batch.samples[i];
    const CandidateSet* cands = sample.cands.get();

    const std::vector<int>* rows =
        params.cfg.layout.bo_mode ? &sample.enc.action_pos : nullptr;
    nn::Mat<S> logits = forward_action(params, sample.enc.action_stream, cands, ws, rows);
    nn::Mat<S> dlogits = nn::Mat<S>::Zero(logits.rows(), logits.cols());
    std::vector<double> w;
    action_losses[i] =
        action_loss_sample(logits, sample.enc, batch.action_space, cfg.weight_clip,
                           cfg.unbiased, inv_Ma, &dlogits, &w);
    for (double v : w) weight_sums[i] += v;
    backward_action(params, sample.enc.action_stream, cands, ws, dlogits,
                    sample.enc.action_pos, G);

    if (params.has_return_model() && !sample.enc.return_pos.empty()) {
      nn::Mat<S> rlogits = forward_return(params, sample.enc.return_stream, ws);
      nn::Mat<S> drlogits = nn::Mat<S>::Zero(rlogits.rows(), rlogits.cols());
      return_losses[i] = return_model_loss(rlogits, sample.enc, inv_Mr, &drlogits);
      drlogits *= S(cfg.loss_mix);
      backward_return(params, sample.enc.return_stream, ws, drlogits, G);
    }
  }

  StepMetrics m;
  double weight_total = 0.0;
  for (int i = 0; i < n; ++i) {
    m.action_loss += action_losses[i];
    m.return_loss += return_losses[i];
    weight_total += weight_sums[i];
  }
  m.mean_weight = weight_total / double(M_a);
  if (!std::isfinite(m.action_loss) || !std::isfinite(m.return_loss))
    throw NumericError("non-finite loss (action=" + std::to_string(m.action_loss) +
                       ", return=" + std::to_string(m.return_loss) + ")");

  // ordered reduction into worker 0
  for (int t = 1; t < workers; ++t) {
    auto dst = scratch.grads[0].tensors();
    auto src = scratch.grads[t].tensors();
    for (size_t i = 0; i < dst.size(); ++i) *dst[i] += *src[i];
  }
  double sq = 0.0;
  for (auto* g : scratch.grads[0].tensors()) sq += double(g->squaredNorm());
  m.grad_norm = std::sqrt(sq);
  if (!std::isfinite(m.grad_norm)) throw NumericError("non-finite gradient norm");
  if (cfg.grad_clip > 0 && m.grad_norm > cfg.grad_clip) {
    const S scale = S(cfg.grad_clip / m.grad_norm);
    for (auto* g : scratch.grads[0].tensors()) (*g) *= scale;
  }

  nn::AdamConfig acfg{cfg.lr_at(scratch.adam.steps), cfg.beta1, cfg.beta2, cfg.adam_eps};
  auto ps = params.tensors();
  auto gs = scratch.grads[0].tensors();
  scratch.adam.step(ps, gs, acfg);
  return m;
}

// ---------------------------------------------------------------------------
// Enumeration oracles for the biased / unbiased action posteriors on a finite
// one-step bandit with known return tables. p_r_given_a is |A| x |R|.

inline Vecd oracle_biased_posterior(const Vecd& pi, const Matd& p_r_given_a, int r_value) {
  if (pi.size() != p_r_given_a.rows()) throw ShapeError("policy/table size mismatch");
  if (r_value < 0 || r_value >= p_r_given_a.cols()) throw InputError("return value out of range");
  Vecd num = p_r_given_a.col(r_value).array() * pi.array();
  const double z = num.sum();
  if (z <= 0.0) throw NumericError("posterior numerator is identically zero");
  return num / z;
}

inline Vecd oracle_unbiased_posterior(const Matd& p_r_given_a, int r_value) {
  const Vecd uniform = Vecd::Constant(p_r_given_a.rows(), 1.0 / double(p_r_given_a.rows()));
  return oracle_biased_posterior(uniform, p_r_given_a, r_value);
}

}  // namespace icee::objectives
