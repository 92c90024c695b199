#pragma once

// Minimal causal-transformer core used by both the action and return trunks.
// Parameters, gradients and optimizer moments share one structure so they can
// be visited in a fixed order; forward/backward are free functions over a
// caller-owned workspace, which keeps evaluation pure and thread-safe.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "icee/common.hpp"
#include "icee/rng.hpp"

namespace icee::nn {

template <typename S>
using Mat = MatX<S>;

struct TrunkConfig {
  int n_layer = 4;
  int n_embd = 64;
  int n_head = 4;
  int max_ctx = 1024;

  void validate() const {
    if (n_layer < 1 || n_embd < 1 || n_head < 1 || max_ctx < 1)
      throw ConfigError("trunk dimensions must be positive");
    if (n_embd % n_head != 0) throw ConfigError("n_embd must be divisible by n_head");
  }
  int head_dim() const { return n_embd / n_head; }
};

template <typename S>
struct LayerParams {
  Mat<S> ln1_g, ln1_b;
  Mat<S> w_qkv, b_qkv;  // (D, 3D), (1, 3D)
  Mat<S> w_o, b_o;      // (D, D), (1, D)
  Mat<S> ln2_g, ln2_b;
  Mat<S> w_fc, b_fc;  // (D, 4D), (1, 4D)
  Mat<S> w_pr, b_pr;  // (4D, D), (1, D)

  void collect(std::vector<Mat<S>*>& v) {
    for (Mat<S>* m : {&ln1_g, &ln1_b, &w_qkv, &b_qkv, &w_o, &b_o, &ln2_g, &ln2_b, &w_fc,
                      &b_fc, &w_pr, &b_pr})
      v.push_back(m);
  }
};

template <typename S>
inline void fill_normal(Mat<S>& m, Rng& rng, double stddev) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = S(rng.normal() * stddev);
}

template <typename S>
struct TrunkParams {
  TrunkConfig cfg;
  Mat<S> wpe;  // (max_ctx, D)
  std::vector<LayerParams<S>> layers;
  Mat<S> lnf_g, lnf_b;

  void collect(std::vector<Mat<S>*>& v) {
    v.push_back(&wpe);
    for (auto& layer : layers) layer.collect(v);
    v.push_back(&lnf_g);
    v.push_back(&lnf_b);
  }

  void allocate(const TrunkConfig& c) {
    cfg = c;
    cfg.validate();
    const int D = cfg.n_embd;
    wpe.setZero(cfg.max_ctx, D);
    layers.resize(cfg.n_layer);
    for (auto& l : layers) {
      l.ln1_g.setOnes(1, D);
      l.ln1_b.setZero(1, D);
      l.w_qkv.setZero(D, 3 * D);
      l.b_qkv.setZero(1, 3 * D);
      l.w_o.setZero(D, D);
      l.b_o.setZero(1, D);
      l.ln2_g.setOnes(1, D);
      l.ln2_b.setZero(1, D);
      l.w_fc.setZero(D, 4 * D);
      l.b_fc.setZero(1, 4 * D);
      l.w_pr.setZero(4 * D, D);
      l.b_pr.setZero(1, D);
    }
    lnf_g.setOnes(1, D);
    lnf_b.setZero(1, D);
  }

  void init(const TrunkConfig& c, Rng& rng, double stddev = 0.02) {
    allocate(c);
    fill_normal(wpe, rng, stddev);
    const double proj_std = stddev / std::sqrt(2.0 * cfg.n_layer);
    for (auto& l : layers) {
      fill_normal(l.w_qkv, rng, stddev);
      fill_normal(l.w_o, rng, proj_std);
      fill_normal(l.w_fc, rng, stddev);
      fill_normal(l.w_pr, rng, proj_std);
    }
  }

  void zero_like(const TrunkParams& other) {
    cfg = other.cfg;
    wpe.setZero(other.wpe.rows(), other.wpe.cols());
    layers.resize(other.layers.size());
    for (size_t i = 0; i < layers.size(); ++i) {
      auto zero = [](Mat<S>& dst, const Mat<S>& src) { dst.setZero(src.rows(), src.cols()); };
      zero(layers[i].ln1_g, other.layers[i].ln1_g);
      zero(layers[i].ln1_b, other.layers[i].ln1_b);
      zero(layers[i].w_qkv, other.layers[i].w_qkv);
      zero(layers[i].b_qkv, other.layers[i].b_qkv);
      zero(layers[i].w_o, other.layers[i].w_o);
      zero(layers[i].b_o, other.layers[i].b_o);
      zero(layers[i].ln2_g, other.layers[i].ln2_g);
      zero(layers[i].ln2_b, other.layers[i].ln2_b);
      zero(layers[i].w_fc, other.layers[i].w_fc);
      zero(layers[i].b_fc, other.layers[i].b_fc);
      zero(layers[i].w_pr, other.layers[i].w_pr);
      zero(layers[i].b_pr, other.layers[i].b_pr);
    }
    zero_like_mat(lnf_g, other.lnf_g);
    zero_like_mat(lnf_b, other.lnf_b);
  }

  static void zero_like_mat(Mat<S>& dst, const Mat<S>& src) {
    dst.setZero(src.rows(), src.cols());
  }
};

// ---------------------------------------------------------------------------
// elementwise pieces

inline constexpr double kLnEps = 1e-5;

template <typename S>
inline void gelu_forward(const Mat<S>& x, Mat<S>& y) {
  const S c = S(0.7978845608028654);  // sqrt(2/pi)
  y = (S(0.5) * x.array() *
       (S(1) + ((c * (x.array() + S(0.044715) * x.array().cube())).tanh())))
          .matrix();
}

template <typename S>
inline void gelu_backward(const Mat<S>& x, const Mat<S>& dy, Mat<S>& dx) {
  const S c = S(0.7978845608028654);
  auto u = (c * (x.array() + S(0.044715) * x.array().cube())).eval();
  auto t = u.tanh().eval();
  auto du = (c * (S(1) + S(3) * S(0.044715) * x.array().square())).eval();
  dx = (dy.array() * (S(0.5) * (S(1) + t) + S(0.5) * x.array() * (S(1) - t.square()) * du))
           .matrix();
}

template <typename S>
struct LnCache {
  Mat<S> x;     // input
  Mat<S> y;     // normalized output
  Mat<S> mean;  // (L, 1)
  Mat<S> rstd;  // (L, 1)
};

template <typename S>
inline void layernorm_forward(const Mat<S>& x, const Mat<S>& g, const Mat<S>& b,
                              LnCache<S>& c) {
  const int L = int(x.rows()), D = int(x.cols());
  c.x = x;
  c.mean.resize(L, 1);
  c.rstd.resize(L, 1);
  c.y.resize(L, D);
  for (int p = 0; p < L; ++p) {
    const S mu = x.row(p).mean();
    const S var = (x.row(p).array() - mu).square().mean();
    const S rstd = S(1) / std::sqrt(var + S(kLnEps));
    c.mean(p, 0) = mu;
    c.rstd(p, 0) = rstd;
    c.y.row(p) =
        (((x.row(p).array() - mu) * rstd) * g.row(0).array() + b.row(0).array()).matrix();
  }
}

template <typename S>
inline void layernorm_backward(const LnCache<S>& c, const Mat<S>& g, const Mat<S>& dy,
                               Mat<S>& dx, Mat<S>& dg, Mat<S>& db) {
  const int L = int(c.x.rows()), D = int(c.x.cols());
  dx.resize(L, D);
  for (int p = 0; p < L; ++p) {
    const S mu = c.mean(p, 0), rstd = c.rstd(p, 0);
    auto xhat = ((c.x.row(p).array() - mu) * rstd).eval();
    auto dyh = (dy.row(p).array() * g.row(0).array()).eval();
    dg.row(0).array() += dy.row(p).array() * xhat;
    db.row(0).array() += dy.row(p).array();
    const S m1 = dyh.mean();
    const S m2 = (dyh * xhat).mean();
    dx.row(p) = ((dyh - m1 - xhat * m2) * rstd).matrix();
  }
}

// ---------------------------------------------------------------------------
// workspace: per-sequence activation caches, reused across calls

template <typename S>
struct LayerCache {
  LnCache<S> ln1, ln2;
  Mat<S> qkv;                 // (L, 3D)
  std::vector<Mat<S>> probs;  // per head (L, L) attention weights
  Mat<S> att;                 // (L, D) concatenated head outputs
  Mat<S> fc, gelu;            // (L, 4D)
};

template <typename S>
struct Workspace {
  int len = 0;
  Mat<S> x0;  // embeddings + positions
  std::vector<LayerCache<S>> layers;
  LnCache<S> lnf;
  Mat<S> out;  // final normalized output (L, D)

  // scratch reused by attention
  Mat<S> qh, kh, vh, sh, doh, dqh, dkh, dvh, dqkv, datt, tmp;
};

// ---------------------------------------------------------------------------
// trunk forward / backward

template <typename S>
inline const Mat<S>& trunk_forward(const TrunkParams<S>& P, const Mat<S>& emb,
                                   Workspace<S>& ws) {
  const TrunkConfig& cfg = P.cfg;
  const int L = int(emb.rows()), D = cfg.n_embd, H = cfg.n_head, hs = cfg.head_dim();
  if (L < 1) throw InputError("empty stream");
  if (L > cfg.max_ctx) throw LengthError("stream exceeds the context length");
  if (int(emb.cols()) != D) throw ShapeError("embedding width mismatch");
  const S scale = S(1) / std::sqrt(S(hs));

  ws.len = L;
  ws.layers.resize(cfg.n_layer);
  ws.x0 = emb + P.wpe.topRows(L);

  Mat<S> x = ws.x0;
  for (int li = 0; li < cfg.n_layer; ++li) {
    LayerCache<S>& lc = ws.layers[li];
    const LayerParams<S>& lp = P.layers[li];

    layernorm_forward(x, lp.ln1_g, lp.ln1_b, lc.ln1);
    lc.qkv.noalias() = lc.ln1.y * lp.w_qkv;
    lc.qkv.rowwise() += lp.b_qkv.row(0);

    lc.att.resize(L, D);
    lc.probs.resize(H);
    for (int h = 0; h < H; ++h) {
      ws.qh = lc.qkv.middleCols(h * hs, hs);
      ws.kh = lc.qkv.middleCols(D + h * hs, hs);
      ws.vh = lc.qkv.middleCols(2 * D + h * hs, hs);
      Mat<S>& probs = lc.probs[h];
      probs.resize(L, L);
      probs.noalias() = ws.qh * ws.kh.transpose();
      for (int p = 0; p < L; ++p) {
        auto row = probs.row(p).head(p + 1);
        const S mx = (row * scale).maxCoeff();
        row = ((row * scale).array() - mx).exp();
        row /= row.sum();
        if (p + 1 < L) probs.row(p).tail(L - p - 1).setZero();
      }
      lc.att.middleCols(h * hs, hs).noalias() = probs * ws.vh;
    }
    ws.tmp.noalias() = lc.att * lp.w_o;
    ws.tmp.rowwise() += lp.b_o.row(0);
    x += ws.tmp;

    layernorm_forward(x, lp.ln2_g, lp.ln2_b, lc.ln2);
    lc.fc.noalias() = lc.ln2.y * lp.w_fc;
    lc.fc.rowwise() += lp.b_fc.row(0);
    gelu_forward(lc.fc, lc.gelu);
    ws.tmp.noalias() = lc.gelu * lp.w_pr;
    ws.tmp.rowwise() += lp.b_pr.row(0);
    x += ws.tmp;
  }
  layernorm_forward(x, P.lnf_g, P.lnf_b, ws.lnf);
  ws.out = ws.lnf.y;
  return ws.out;
}

// dout is the gradient w.r.t. the normalized trunk output; returns the
// gradient w.r.t. the input embeddings and accumulates parameter gradients.
template <typename S>
inline Mat<S> trunk_backward(const TrunkParams<S>& P, Workspace<S>& ws, const Mat<S>& dout,
                             TrunkParams<S>& G) {
  const TrunkConfig& cfg = P.cfg;
  const int L = ws.len, D = cfg.n_embd, H = cfg.n_head, hs = cfg.head_dim();
  const S scale = S(1) / std::sqrt(S(hs));

  Mat<S> dx;
  layernorm_backward(ws.lnf, P.lnf_g, dout, dx, G.lnf_g, G.lnf_b);

  for (int li = cfg.n_layer - 1; li >= 0; --li) {
    LayerCache<S>& lc = ws.layers[li];
    const LayerParams<S>& lp = P.layers[li];
    LayerParams<S>& lg = G.layers[li];

    // MLP block
    Mat<S>& dgelu = ws.tmp;
    dgelu.noalias() = dx * lp.w_pr.transpose();
    lg.w_pr.noalias() += lc.gelu.transpose() * dx;
    lg.b_pr.row(0) += dx.colwise().sum();
    Mat<S> dfc;
    gelu_backward(lc.fc, dgelu, dfc);
    lg.w_fc.noalias() += lc.ln2.y.transpose() * dfc;
    lg.b_fc.row(0) += dfc.colwise().sum();
    Mat<S> dln2in;
    {
      Mat<S> dln2out;
      dln2out.noalias() = dfc * lp.w_fc.transpose();
      layernorm_backward(lc.ln2, lp.ln2_g, dln2out, dln2in, lg.ln2_g, lg.ln2_b);
    }
    dx += dln2in;

    // attention block
    ws.datt.noalias() = dx * lp.w_o.transpose();
    lg.w_o.noalias() += lc.att.transpose() * dx;
    lg.b_o.row(0) += dx.colwise().sum();

    ws.dqkv.setZero(L, 3 * D);
    for (int h = 0; h < H; ++h) {
      ws.qh = lc.qkv.middleCols(h * hs, hs);
      ws.kh = lc.qkv.middleCols(D + h * hs, hs);
      ws.vh = lc.qkv.middleCols(2 * D + h * hs, hs);
      ws.doh = ws.datt.middleCols(h * hs, hs);
      const Mat<S>& probs = lc.probs[h];

      ws.dvh.noalias() = probs.transpose() * ws.doh;
      ws.sh.noalias() = ws.doh * ws.vh.transpose();  // dP
      for (int p = 0; p < L; ++p) {
        auto prow = probs.row(p).head(p + 1);
        auto drow = ws.sh.row(p).head(p + 1);
        const S dot = (drow.array() * prow.array()).sum();
        drow = (prow.array() * (drow.array() - dot)).matrix();
        if (p + 1 < L) ws.sh.row(p).tail(L - p - 1).setZero();
      }
      ws.dqh.noalias() = ws.sh * ws.kh * scale;
      ws.dkh.noalias() = ws.sh.transpose() * ws.qh * scale;
      ws.dqkv.middleCols(h * hs, hs) += ws.dqh;
      ws.dqkv.middleCols(D + h * hs, hs) += ws.dkh;
      ws.dqkv.middleCols(2 * D + h * hs, hs) += ws.dvh;
    }
    lg.w_qkv.noalias() += lc.ln1.y.transpose() * ws.dqkv;
    lg.b_qkv.row(0) += ws.dqkv.colwise().sum();
    Mat<S> dln1in;
    {
      Mat<S> dln1out;
      dln1out.noalias() = ws.dqkv * lp.w_qkv.transpose();
      layernorm_backward(lc.ln1, lp.ln1_g, dln1out, dln1in, lg.ln1_g, lg.ln1_b);
    }
    dx += dln1in;
  }
  G.wpe.topRows(L) += dx;
  return dx;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename S>
struct AdamState {
  std::vector<Mat<S>> m, v;
  long steps = 0;

  void ensure(const std::vector<Mat<S>*>& params) {
    if (!m.empty()) return;
    m.resize(params.size());
    v.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m[i].setZero(params[i]->rows(), params[i]->cols());
      v[i].setZero(params[i]->rows(), params[i]->cols());
    }
  }

  void step(const std::vector<Mat<S>*>& params, const std::vector<Mat<S>*>& grads,
            const AdamConfig& cfg) {
    ensure(params);
    ++steps;
    const S c1 = S(1.0 - std::pow(cfg.beta1, double(steps)));
    const S c2 = S(1.0 - std::pow(cfg.beta2, double(steps)));
    for (size_t i = 0; i < params.size(); ++i) {
      auto& g = *grads[i];
      m[i] = S(cfg.beta1) * m[i] + S(1 - cfg.beta1) * g;
      v[i] = (S(cfg.beta2) * v[i].array() + S(1 - cfg.beta2) * g.array().square()).matrix();
      params[i]->array() -=
          S(cfg.lr) * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + S(cfg.eps));
    }
  }
};

}  // namespace icee::nn
