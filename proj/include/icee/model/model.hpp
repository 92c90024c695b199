#pragma once

#include <optional>
#include <vector>

#include "icee/common.hpp"
#include "icee/model/layout.hpp"
#include "icee/nn/core.hpp"
#include "icee/rng.hpp"
#include "icee/types.hpp"

namespace icee::model {

struct ModelConfig {
  nn::TrunkConfig trunk;  // both trunks share the architecture descriptor
  TokenLayout layout;
  int bo_dim = 2;
  int score_hidden = 64;
  uint64_t init_seed = 0;

  void validate() const {
    trunk.validate();
    layout.validate();
    if (layout.bo_mode && (bo_dim < 1 || score_hidden < 1))
      throw ConfigError("invalid BO codec dimensions");
  }
};

// Parameters of the action model, the (optional) return model, and the
// (optional) BO action codec. The two trunks share no tensors.
template <typename S>
struct ModelParams {
  ModelConfig cfg;

  nn::TrunkParams<S> trunk_a;
  nn::Mat<S> wte_a;            // discrete table for the action stream
  nn::Mat<S> head_w, head_b;   // RL action head (D, A)

  nn::Mat<S> w_loc, b_loc;     // location -> embedding (d, D)
  nn::Mat<S> w_val, b_val;     // scalar value -> embedding (1, D)
  nn::Mat<S> score_w1h, score_w1e, score_b1;  // scoring MLP, split input
  nn::Mat<S> score_w2, score_b2;

  nn::TrunkParams<S> trunk_r;
  nn::Mat<S> wte_r;
  nn::Mat<S> rhead_w, rhead_b;  // return head (D, bins)

  bool has_return_model() const { return cfg.layout.has_return_model(); }

  void collect(std::vector<nn::Mat<S>*>& v) {
    trunk_a.collect(v);
    v.push_back(&wte_a);
    if (cfg.layout.bo_mode) {
      for (nn::Mat<S>* m : {&w_loc, &b_loc, &w_val, &b_val, &score_w1h, &score_w1e,
                            &score_b1, &score_w2, &score_b2})
        v.push_back(m);
    } else {
      v.push_back(&head_w);
      v.push_back(&head_b);
    }
    if (has_return_model()) {
      trunk_r.collect(v);
      v.push_back(&wte_r);
      v.push_back(&rhead_w);
      v.push_back(&rhead_b);
    }
  }

  std::vector<nn::Mat<S>*> tensors() {
    std::vector<nn::Mat<S>*> v;
    collect(v);
    return v;
  }

  long parameter_count() {
    long n = 0;
    for (auto* m : tensors()) n += long(m->size());
    return n;
  }

  void init(const ModelConfig& c, uint64_t seed) {
    cfg = c;
    cfg.validate();
    cfg.init_seed = seed;
    const int D = cfg.trunk.n_embd;
    Rng rng(derive_seed(seed, "model-init"));
    const double sd = 0.02;

    trunk_a.init(cfg.trunk, rng, sd);
    wte_a.setZero(action_vocab(cfg.layout).size, D);
    nn::fill_normal(wte_a, rng, sd);
    if (cfg.layout.bo_mode) {
      w_loc.setZero(cfg.bo_dim, D);
      nn::fill_normal(w_loc, rng, sd);
      b_loc.setZero(1, D);
      w_val.setZero(1, D);
      nn::fill_normal(w_val, rng, sd);
      b_val.setZero(1, D);
      const int H = cfg.score_hidden;
      score_w1h.setZero(D, H);
      nn::fill_normal(score_w1h, rng, sd);
      score_w1e.setZero(D, H);
      nn::fill_normal(score_w1e, rng, sd);
      score_b1.setZero(1, H);
      score_w2.setZero(H, 1);
      nn::fill_normal(score_w2, rng, sd);
      score_b2.setZero(1, 1);
    } else {
      head_w.setZero(D, cfg.layout.n_actions);
      nn::fill_normal(head_w, rng, sd);
      head_b.setZero(1, cfg.layout.n_actions);
    }
    if (has_return_model()) {
      trunk_r.init(cfg.trunk, rng, sd);
      wte_r.setZero(return_vocab(cfg.layout).size, D);
      nn::fill_normal(wte_r, rng, sd);
      rhead_w.setZero(D, cfg.layout.bins);
      nn::fill_normal(rhead_w, rng, sd);
      rhead_b.setZero(1, cfg.layout.bins);
    }
  }

  void zero_like(const ModelParams& other) {
    cfg = other.cfg;
    trunk_a.zero_like(other.trunk_a);
    auto zero = [](nn::Mat<S>& dst, const nn::Mat<S>& src) {
      dst.setZero(src.rows(), src.cols());
    };
    zero(wte_a, other.wte_a);
    zero(head_w, other.head_w);
    zero(head_b, other.head_b);
    zero(w_loc, other.w_loc);
    zero(b_loc, other.b_loc);
    zero(w_val, other.w_val);
    zero(b_val, other.b_val);
    zero(score_w1h, other.score_w1h);
    zero(score_w1e, other.score_w1e);
    zero(score_b1, other.score_b1);
    zero(score_w2, other.score_w2);
    zero(score_b2, other.score_b2);
    if (other.has_return_model()) {
      trunk_r.zero_like(other.trunk_r);
      zero(wte_r, other.wte_r);
      zero(rhead_w, other.rhead_w);
      zero(rhead_b, other.rhead_b);
    }
  }

  void set_zero() {
    for (auto* m : tensors()) m->setZero();
  }
};

// Per-thread evaluation scratch for one model.
template <typename S>
struct ModelWorkspace {
  nn::Workspace<S> trunk_a, trunk_r;
  nn::Mat<S> emb_a, emb_r;
  nn::Mat<S> cand_emb;        // (N, D)
  nn::Mat<S> score_a, score_b;  // (L, Hs), (N, Hs)
  nn::Mat<S> logits_a, logits_r;
};

namespace detail {

template <typename S>
inline void assemble_embeddings(const ModelParams<S>& P, const Stream& stream,
                                const nn::Mat<S>& wte, const CandidateSet* cands,
                                nn::Mat<S>& emb) {
  const int D = P.cfg.trunk.n_embd;
  const int L = int(stream.size());
  emb.resize(L, D);
  for (int p = 0; p < L; ++p) {
    const Token& tok = stream[p];
    switch (tok.kind) {
      case Token::kDisc:
        if (tok.id < 0 || tok.id >= wte.rows()) throw DataError("token id out of vocabulary");
        emb.row(p) = wte.row(tok.id);
        break;
      case Token::kLoc: {
        if (cands == nullptr) throw ModeError("location token without a candidate set");
        if (tok.id < 0 || tok.id >= cands->size())
          throw DataError("candidate index out of range");
        nn::Mat<S> x(1, P.cfg.bo_dim);
        for (int i = 0; i < P.cfg.bo_dim; ++i) x(0, i) = S(cands->locations(tok.id, i));
        emb.row(p).noalias() = x * P.w_loc;
        emb.row(p) += P.b_loc.row(0);
        break;
      }
      case Token::kVal:
        emb.row(p) = P.w_val.row(0) * S(tok.value) + P.b_val.row(0);
        break;
    }
  }
}

// Row-local on purpose: blocked GEMM kernels round differently depending on
// a row's position inside a panel, which would break the bit-level
// permutation equivariance of the candidate scores.
template <typename S>
inline void candidate_embeddings(const ModelParams<S>& P, const CandidateSet& cands,
                                 nn::Mat<S>& out) {
  const int N = cands.size(), D = P.cfg.trunk.n_embd;
  out.resize(N, D);
  nn::Mat<S> x(1, P.cfg.bo_dim);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < P.cfg.bo_dim; ++j) x(0, j) = S(cands.locations(i, j));
    out.row(i).noalias() = x * P.w_loc;
    out.row(i) += P.b_loc.row(0);
  }
}

}  // namespace detail

// Per-position logits of the action model: (L, A) in RL mode, (L, N) in BO
// mode. Position p depends only on tokens at positions <= p. In BO mode a
// row subset may be given; rows outside it are left at zero.
template <typename S>
inline nn::Mat<S> forward_action(const ModelParams<S>& P, const Stream& stream,
                                 const CandidateSet* cands, ModelWorkspace<S>& ws,
                                 const std::vector<int>* rows = nullptr) {
  if (stream.empty()) throw InputError("forward_action: empty stream");
  if (int(stream.size()) > P.cfg.trunk.max_ctx)
    throw LengthError("forward_action: stream exceeds the context length");
  if (P.cfg.layout.bo_mode && cands == nullptr)
    throw ModeError("forward_action: BO mode requires a candidate set");

  detail::assemble_embeddings(P, stream, P.wte_a, cands, ws.emb_a);
  const nn::Mat<S>& Y = nn::trunk_forward(P.trunk_a, ws.emb_a, ws.trunk_a);

  if (!P.cfg.layout.bo_mode) {
    ws.logits_a.noalias() = Y * P.head_w;
    ws.logits_a.rowwise() += P.head_b.row(0);
    return ws.logits_a;
  }

  const int L = int(stream.size()), N = cands->size();
  detail::candidate_embeddings(P, *cands, ws.cand_emb);
  ws.score_a.noalias() = Y * P.score_w1h;
  // per-candidate rows, kept row-local for bit-level permutation equivariance
  ws.score_b.resize(N, P.cfg.score_hidden);
  for (int j = 0; j < N; ++j) {
    ws.score_b.row(j).noalias() = ws.cand_emb.row(j) * P.score_w1e;
    ws.score_b.row(j) += P.score_b1.row(0);
  }
  ws.logits_a.setZero(L, N);
  std::vector<int> all;
  if (rows == nullptr) {
    all.resize(L);
    for (int p = 0; p < L; ++p) all[p] = p;
    rows = &all;
  }
  nn::Mat<S> pre(1, P.cfg.score_hidden), act(1, P.cfg.score_hidden);
  for (int p : *rows) {
    for (int j = 0; j < N; ++j) {
      pre.row(0) = ws.score_b.row(j) + ws.score_a.row(p);
      nn::gelu_forward(pre, act);
      ws.logits_a(p, j) = act.row(0).dot(P.score_w2.col(0).transpose()) + P.score_b2(0, 0);
    }
  }
  return ws.logits_a;
}

// Per-position logits of the return model over the bin vocabulary.
template <typename S>
inline nn::Mat<S> forward_return(const ModelParams<S>& P, const Stream& stream,
                                 ModelWorkspace<S>& ws) {
  if (!P.cfg.layout.has_return_model())
    throw ModeError("forward_return: this configuration has no return model");
  if (stream.empty()) throw InputError("forward_return: empty stream");
  if (int(stream.size()) > P.cfg.trunk.max_ctx)
    throw LengthError("forward_return: stream exceeds the context length");

  detail::assemble_embeddings(P, stream, P.wte_r, nullptr, ws.emb_r);
  const nn::Mat<S>& Y = nn::trunk_forward(P.trunk_r, ws.emb_r, ws.trunk_r);
  ws.logits_r.noalias() = Y * P.rhead_w;
  ws.logits_r.rowwise() += P.rhead_b.row(0);
  return ws.logits_r;
}

// Backward pass of the action model. dlogits must match the forward logits
// shape; `active_rows` lists the positions with nonzero gradient (the
// prediction mask) so BO scoring can skip dead rows.
template <typename S>
inline void backward_action(const ModelParams<S>& P, const Stream& stream,
                            const CandidateSet* cands, ModelWorkspace<S>& ws,
                            const nn::Mat<S>& dlogits, const std::vector<int>& active_rows,
                            ModelParams<S>& G) {
  const int L = int(stream.size()), D = P.cfg.trunk.n_embd;
  nn::Mat<S> dY;

  if (!P.cfg.layout.bo_mode) {
    dY.noalias() = dlogits * P.head_w.transpose();
    G.head_w.noalias() += ws.trunk_a.out.transpose() * dlogits;
    G.head_b.row(0) += dlogits.colwise().sum();
  } else {
    const int N = cands->size(), H = P.cfg.score_hidden;
    dY.setZero(L, D);
    nn::Mat<S> dB = nn::Mat<S>::Zero(N, H);
    nn::Mat<S> pre, act, dact, dpre;
    for (int p : active_rows) {
      // recompute the scoring activations for this row (ws.score_b already
      // carries the b1 shift)
      pre = ws.score_b;
      pre.rowwise() += ws.score_a.row(p);
      nn::gelu_forward(pre, act);
      G.score_w2.noalias() += act.transpose() * dlogits.row(p).transpose();
      G.score_b2(0, 0) += dlogits.row(p).sum();
      dact.noalias() = dlogits.row(p).transpose() * P.score_w2.transpose();
      nn::gelu_backward(pre, dact, dpre);
      dB += dpre;
      nn::Mat<S> dA_p = dpre.colwise().sum();
      G.score_b1.row(0) += dA_p.row(0);
      G.score_w1h.noalias() += ws.trunk_a.out.row(p).transpose() * dA_p.row(0);
      dY.row(p).noalias() += dA_p.row(0) * P.score_w1h.transpose();
    }
    G.score_w1e.noalias() += ws.cand_emb.transpose() * dB;
    nn::Mat<S> dE;
    dE.noalias() = dB * P.score_w1e.transpose();
    // through the candidate embeddings into the location projection
    nn::Mat<S> X(N, P.cfg.bo_dim);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < P.cfg.bo_dim; ++j) X(i, j) = S(cands->locations(i, j));
    G.w_loc.noalias() += X.transpose() * dE;
    G.b_loc.row(0) += dE.colwise().sum();
  }

  const nn::Mat<S> demb = nn::trunk_backward(P.trunk_a, ws.trunk_a, dY, G.trunk_a);
  for (int p = 0; p < L; ++p) {
    const Token& tok = stream[p];
    switch (tok.kind) {
      case Token::kDisc:
        G.wte_a.row(tok.id) += demb.row(p);
        break;
      case Token::kLoc:
        for (int i = 0; i < P.cfg.bo_dim; ++i)
          G.w_loc.row(i) += demb.row(p) * S(cands->locations(tok.id, i));
        G.b_loc.row(0) += demb.row(p);
        break;
      case Token::kVal:
        G.w_val.row(0) += demb.row(p) * S(tok.value);
        G.b_val.row(0) += demb.row(p);
        break;
    }
  }
}

template <typename S>
inline void backward_return(const ModelParams<S>& P, const Stream& stream,
                            ModelWorkspace<S>& ws, const nn::Mat<S>& dlogits,
                            ModelParams<S>& G) {
  nn::Mat<S> dY;
  dY.noalias() = dlogits * P.rhead_w.transpose();
  G.rhead_w.noalias() += ws.trunk_r.out.transpose() * dlogits;
  G.rhead_b.row(0) += dlogits.colwise().sum();
  const nn::Mat<S> demb = nn::trunk_backward(P.trunk_r, ws.trunk_r, dY, G.trunk_r);
  for (int p = 0; p < int(stream.size()); ++p) G.wte_r.row(stream[p].id) += demb.row(p);
}

}  // namespace icee::model
