// Acceptance suite: runs every gating criterion end-to-end and prints one
// PASS/FAIL line each. Exit code is the number of failed gating criteria.
//
// ICEE_ACCEPT_ONLY=1,2,7    runs a subset (comma-separated criterion ids)
// ICEE_PAPER_STRETCH=1      also runs the optional paper-scale report

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icee/harness/runner.hpp"

using namespace icee;
using Clock = std::chrono::steady_clock;

namespace {

double minutes_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
}

struct Result {
  int id;
  bool pass;
  bool gating;
  std::string detail;
};

std::vector<Result> g_results;

void record(int id, bool pass, const std::string& detail, bool gating = true) {
  g_results.push_back({id, pass, gating, detail});
  std::fprintf(stderr, "[%s] criterion %d: %s\n", pass ? "pass" : "FAIL", id,
               detail.c_str());
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// A small generic token model over the shared trunk, used by the sequence
// prediction checks (Bernoulli sequences, one-step bandit).

struct TinyTokenModel {
  nn::TrunkConfig cfg;
  nn::TrunkParams<float> trunk;
  Matf wte, head_w, head_b;

  void init(int vocab, int out_dim, int layers, int dim, int heads, int ctx,
            uint64_t seed) {
    cfg = {layers, dim, heads, ctx};
    Rng rng(derive_seed(seed, "tiny-model"));
    trunk.init(cfg, rng, 0.02);
    wte.setZero(vocab, dim);
    nn::fill_normal(wte, rng, 0.02);
    head_w.setZero(dim, out_dim);
    nn::fill_normal(head_w, rng, 0.02);
    head_b.setZero(1, out_dim);
  }

  Matf forward(const std::vector<int>& tokens, nn::Workspace<float>& ws) const {
    Matf emb(int(tokens.size()), cfg.n_embd);
    for (size_t p = 0; p < tokens.size(); ++p) emb.row(int(p)) = wte.row(tokens[p]);
    const Matf& y = nn::trunk_forward(trunk, emb, ws);
    Matf logits = y * head_w;
    logits.rowwise() += head_b.row(0);
    return logits;
  }

  struct Grads {
    nn::TrunkParams<float> trunk;
    Matf wte, head_w, head_b;
  };

  struct Example {
    std::vector<int> tokens;
    std::vector<int> positions;
    std::vector<int> targets;
    std::vector<double> weights;
  };

  // weighted-CE Adam training over an example generator
  template <typename Gen>
  void train(Gen&& gen, long steps, int batch, double lr, uint64_t seed) {
    Grads G;
    G.trunk.zero_like(trunk);
    G.wte.setZero(wte.rows(), wte.cols());
    G.head_w.setZero(head_w.rows(), head_w.cols());
    G.head_b.setZero(1, head_b.cols());
    nn::AdamState<float> adam;
    std::vector<Matf*> params{&wte, &head_w, &head_b};
    trunk.collect(params);
    std::vector<Matf*> grads{&G.wte, &G.head_w, &G.head_b};
    G.trunk.collect(grads);
    nn::Workspace<float> ws;

    for (long step = 0; step < steps; ++step) {
      for (auto* g : grads) g->setZero();
      Rng rng(derive_seed(seed, "tiny-train", uint64_t(step)));
      size_t M = 0;
      std::vector<Example> examples;
      for (int b = 0; b < batch; ++b) {
        examples.push_back(gen(rng));
        M += examples.back().positions.size();
      }
      for (const Example& ex : examples) {
        const Matf logits = forward(ex.tokens, ws);
        Matf dlogits = Matf::Zero(logits.rows(), logits.cols());
        for (size_t i = 0; i < ex.positions.size(); ++i) {
          const int p = ex.positions[i];
          Vecf prob = logits.row(p).transpose();
          const float mx = prob.maxCoeff();
          prob = (prob.array() - mx).exp();
          prob /= prob.sum();
          prob[ex.targets[i]] -= 1.0f;
          dlogits.row(p) += prob.transpose() * float(ex.weights[i] / double(M));
        }
        Matf dY = dlogits * head_w.transpose();
        G.head_w.noalias() += ws.out.transpose() * dlogits;
        G.head_b.row(0) += dlogits.colwise().sum();
        const Matf demb = nn::trunk_backward(trunk, ws, dY, G.trunk);
        for (size_t p = 0; p < ex.tokens.size(); ++p)
          G.wte.row(ex.tokens[p]) += demb.row(int(p));
      }
      adam.step(params, grads, {lr, 0.9, 0.999, 1e-8});
    }
  }

  Vecd predict(const std::vector<int>& tokens, int pos) const {
    nn::Workspace<float> ws;
    const Matf logits = forward(tokens, ws);
    Vecd p(logits.cols());
    double mx = logits.row(pos).maxCoeff(), z = 0;
    for (int j = 0; j < logits.cols(); ++j) {
      p[j] = std::exp(double(logits(pos, j)) - mx);
      z += p[j];
    }
    return p / z;
  }
};

double tv_distance(const Vecd& a, const Vecd& b) {
  return 0.5 * (a - b).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// criterion 1: maximum-likelihood sequence training recovers the Beta(1,1)
// posterior predictive (h+1)/(t+1)

void criterion_1() {
  const auto t0 = Clock::now();
  const int T = 20, BOS = 2;
  TinyTokenModel model;
  model.init(/*vocab=*/3, /*out=*/2, /*layers=*/2, /*dim=*/32, /*heads=*/4,
             /*ctx=*/T + 1, /*seed=*/11);

  // 50k sequences, theta ~ Beta(1,1) = U(0,1), replayed for a few epochs
  const int n_sequences = 50000;
  std::vector<std::vector<int>> data(n_sequences);
  {
    Rng rng(derive_seed(11, "bernoulli-data"));
    for (auto& seq : data) {
      const double theta = rng.uniform();
      seq.resize(T + 1);
      seq[0] = BOS;
      for (int t = 1; t <= T; ++t) seq[t] = rng.bernoulli(theta) ? 1 : 0;
    }
  }
  auto gen = [&](Rng& rng) {
    TinyTokenModel::Example ex;
    ex.tokens = data[size_t(rng.uniform_int(n_sequences))];
    for (int p = 0; p < T; ++p) {
      ex.positions.push_back(p);
      ex.targets.push_back(ex.tokens[p + 1]);
      ex.weights.push_back(1.0);
    }
    return ex;
  };
  model.train(gen, /*steps=*/2400, /*batch=*/64, /*lr=*/1e-3, /*seed=*/12);

  // mean absolute error of the predictive against (h+1)/(t+1) over all (t,h)
  Rng rng(derive_seed(11, "bernoulli-eval"));
  double mae = 0;
  int pairs = 0;
  for (int t = 1; t <= T; ++t) {
    for (int h = 0; h <= t - 1; ++h) {
      double pred = 0;
      const int reps = 8;
      for (int rep = 0; rep < reps; ++rep) {
        std::vector<int> tokens{BOS};
        std::vector<int> bits(t - 1, 0);
        for (int i = 0; i < h; ++i) bits[i] = 1;
        for (int i = t - 2; i > 0; --i) std::swap(bits[i], bits[rng.uniform_int(i + 1)]);
        for (int b : bits) tokens.push_back(b);
        pred += model.predict(tokens, t - 1)[1];
      }
      pred /= reps;
      mae += std::abs(pred - double(h + 1) / double(t + 1));
      ++pairs;
    }
  }
  mae /= pairs;
  const double mins = minutes_since(t0);
  record(1, mae < 0.05 && mins < 15.0,
         fmt("Bayes-oracle predictive MAE %.4f (< 0.05) over %d (t,h) pairs, %.1f min "
             "(< 15)",
             mae, pairs, mins));
}

// ---------------------------------------------------------------------------
// criterion 2: the importance-weighted loss recovers the uniform-prior
// posterior; the unweighted loss recovers the behavior-tilted posterior

void criterion_2() {
  const auto t0 = Clock::now();
  const Vecd pi = (Vecd(3) << 0.7, 0.2, 0.1).finished();
  Matd table(3, 2);  // p(R | a), columns R=0, R=1
  table << 0.1, 0.9, 0.5, 0.5, 0.8, 0.2;

  auto make_gen = [&](bool unbiased) {
    return [&, unbiased](Rng& rng) {
      TinyTokenModel::Example ex;
      std::vector<double> pw(pi.data(), pi.data() + 3);
      const int a = rng.categorical(pw);
      const int r = rng.bernoulli(table(a, 1)) ? 1 : 0;
      ex.tokens = {r};
      ex.positions = {0};
      ex.targets = {a};
      ex.weights = {unbiased ? (1.0 / 3.0) / pi[a] : 1.0};
      return ex;
    };
  };
  TinyTokenModel unbiased, biased;
  unbiased.init(2, 3, 2, 32, 4, 4, 21);
  biased.init(2, 3, 2, 32, 4, 4, 21);  // identical init, different objective
  unbiased.train(make_gen(true), 3000, 128, 1e-3, 22);
  biased.train(make_gen(false), 3000, 128, 1e-3, 22);

  double worst_unbiased = 0, worst_biased = 0, min_separation = 1e9;
  for (int r = 0; r < 2; ++r) {
    const Vecd oracle_u = objectives::oracle_unbiased_posterior(table, r);
    const Vecd oracle_b = objectives::oracle_biased_posterior(pi, table, r);
    const Vecd learned_u = unbiased.predict({r}, 0);
    const Vecd learned_b = biased.predict({r}, 0);
    worst_unbiased = std::max(worst_unbiased, tv_distance(learned_u, oracle_u));
    worst_biased = std::max(worst_biased, tv_distance(learned_b, oracle_b));
    min_separation = std::min(min_separation, tv_distance(learned_u, learned_b));
  }
  const double mins = minutes_since(t0);
  record(2,
         worst_unbiased < 0.05 && worst_biased < 0.05 && min_separation > 0.1 &&
             mins < 10.0,
         fmt("bandit posteriors: TV(unbiased) %.4f, TV(biased) %.4f (< 0.05), "
             "separation %.4f (> 0.1), %.1f min (< 10)",
             worst_unbiased, worst_biased, min_separation, mins));
}

// ---------------------------------------------------------------------------
// criteria 3 & 4: desk-scale discrete BO quality and per-suggestion speed

harness::RunConfig bo_cfg(const std::string& mode, uint64_t seed, const std::string& out) {
  harness::RunConfig cfg;
  cfg.mode = mode;
  cfg.domain = "bo";
  cfg.preset = "desk";
  harness::apply_preset(cfg);
  cfg.bo_n = 256;
  cfg.bo_dim = 2;
  cfg.bo_budget = 30;
  cfg.bo_functions = 16;
  cfg.bo_trials = 5;
  cfg.bo_init = 2;
  cfg.bo_collect_len = 48;
  cfg.batch_size = 16;
  cfg.steps = 3000;
  cfg.lr = 3e-4;
  cfg.seed = seed;
  cfg.out = out;
  return cfg;
}

void criteria_3_4(const std::string& workdir) {
  std::fprintf(stderr, "[run] training the BO models...\n");
  harness::RunConfig icee_cfg = bo_cfg("icee", 101, workdir + "/bo");
  harness::RunConfig biased_cfg = bo_cfg("icee-biased", 101, workdir + "/bo");
  harness::train(icee_cfg);
  harness::train(biased_cfg);

  std::fprintf(stderr, "[run] evaluating the BO methods...\n");
  const harness::BoEval icee_ev = harness::evaluate_bo(icee_cfg);
  const harness::BoEval biased_ev = harness::evaluate_bo(biased_cfg);
  harness::RunConfig ei_cfg = bo_cfg("gp-ei", 101, workdir + "/bo");
  const harness::BoEval ei_ev = harness::evaluate_bo(ei_cfg);
  harness::RunConfig rnd_cfg = bo_cfg("random", 101, workdir + "/bo");
  const harness::BoEval rnd_ev = harness::evaluate_bo(rnd_cfg);

  const int last = icee_cfg.bo_budget - 1;
  const double g_icee = harness::mean_of(icee_ev.gaps[last]);
  const double g_biased = harness::mean_of(biased_ev.gaps[last]);
  const double g_ei = harness::mean_of(ei_ev.gaps[last]);
  const double g_rnd = harness::mean_of(rnd_ev.gaps[last]);
  record(3, g_icee < g_rnd && g_icee <= 2.0 * g_ei && g_biased >= g_icee,
         fmt("BO gaps at step 30: icee %.4f < random %.4f, <= 2x gp-ei %.4f, biased %.4f "
             ">= icee",
             g_icee, g_rnd, g_ei, g_biased));

  // per-suggestion wall time once 15 observations are in hand
  auto late_seconds = [&](const harness::BoEval& ev) {
    std::vector<double> s;
    for (int step = 15; step < icee_cfg.bo_budget; ++step)
      for (double v : ev.seconds[step]) s.push_back(v);
    return harness::mean_of(s);
  };
  const double t_icee = late_seconds(icee_ev);
  const double t_ei = late_seconds(ei_ev);
  record(4, t_icee <= t_ei / 10.0,
         fmt("per-suggestion time after 15 observations: icee %.4f s vs gp-ei %.4f s "
             "(ratio %.1fx, needs >= 10x)",
             t_icee, t_ei, t_icee > 0 ? t_ei / t_icee : 1e9));
}

// ---------------------------------------------------------------------------
// criteria 5 & 6: grid-world in-context learning at desk scale

harness::RunConfig grid_cfg(const std::string& mode, const std::string& domain,
                            uint64_t seed, const std::string& out) {
  harness::RunConfig cfg;
  cfg.mode = mode;
  cfg.domain = domain;
  cfg.preset = "desk";
  harness::apply_preset(cfg);
  cfg.grid = 5;
  cfg.episode_len = 10;
  cfg.episodes_per_task = 20;
  cfg.batch_size = 8;
  cfg.steps = 2200;
  cfg.lr = 3e-4;
  cfg.eval_tasks = 100;
  cfg.seed = seed;
  cfg.out = out;
  return cfg;
}

// small kappa sweep on a reduced task set, then the full evaluation
harness::GridEval evaluate_with_kappa_sweep(harness::RunConfig cfg) {
  if (cfg.mode == "icee" || cfg.mode == "icee-biased" || cfg.mode == "mgdt") {
    double best_kappa = 5.0, best_ret = -1e300;
    for (double kappa : {1.0, 5.0}) {
      harness::RunConfig sweep = cfg;
      sweep.kappa = kappa;
      sweep.eval_tasks = 24;
      sweep.out = cfg.out + "/sweep";
      const harness::GridEval ev = harness::evaluate_grid(sweep);
      const double final_ret = harness::mean_of(ev.rets.back());
      std::fprintf(stderr, "[run] %s kappa %.1f -> final-episode return %.3f\n",
                   cfg.mode.c_str(), kappa, final_ret);
      if (final_ret > best_ret) {
        best_ret = final_ret;
        best_kappa = kappa;
      }
    }
    cfg.kappa = best_kappa;
  }
  return harness::evaluate_grid(cfg);
}

void criterion_5(const std::string& workdir) {
  const std::string out = workdir + "/grid";
  std::fprintf(stderr, "[run] training icee / ad / mgdt on dark_room (desk)...\n");
  harness::RunConfig icee_cfg = grid_cfg("icee", "dark_room", 201, out);
  harness::train(icee_cfg);
  harness::RunConfig ad_cfg = grid_cfg("ad", "dark_room", 201, out);
  ad_cfg.steps = 1600;
  harness::train(ad_cfg);
  harness::RunConfig mgdt_cfg = grid_cfg("mgdt", "dark_room", 201, out);
  mgdt_cfg.steps = 1600;
  mgdt_cfg.batch_size = 32;
  harness::train(mgdt_cfg);

  std::fprintf(stderr, "[run] evaluating the grid modes (100 tasks each)...\n");
  const harness::GridEval icee_ev = evaluate_with_kappa_sweep(icee_cfg);
  const harness::GridEval ad_ev = harness::evaluate_grid(ad_cfg);
  const harness::GridEval mgdt_ev = evaluate_with_kappa_sweep(mgdt_cfg);
  harness::RunConfig src_cfg = grid_cfg("source", "dark_room", 201, out);
  const harness::GridEval src_ev = harness::evaluate_grid(src_cfg);

  const int K = icee_cfg.episodes_per_task;
  const double ep1 = harness::mean_of(icee_ev.rets.front());
  const double epK = harness::mean_of(icee_ev.rets.back());

  std::vector<double> episode_idx, entropy_by_episode;
  for (int k = 0; k < K; ++k) {
    episode_idx.push_back(k + 1);
    entropy_by_episode.push_back(harness::mean_of(icee_ev.ents[k]));
  }
  const double rho = harness::spearman(entropy_by_episode, episode_idx);

  auto overall_mean = [&](const harness::GridEval& ev) {
    std::vector<double> all;
    for (const auto& row : ev.rets) all.insert(all.end(), row.begin(), row.end());
    return harness::mean_of(all);
  };
  const double ad_mean = overall_mean(ad_ev), src_mean = overall_mean(src_ev);

  const double m1 = harness::mean_of(mgdt_ev.rets.front());
  const double mK = harness::mean_of(mgdt_ev.rets.back());
  const double c1 = harness::ci95_halfwidth(mgdt_ev.rets.front());
  const double cK = harness::ci95_halfwidth(mgdt_ev.rets.back());

  const bool improves = epK >= 2.0 * ep1;
  const bool entropy_falls = rho < -0.5;
  const bool ad_tracks_source = ad_mean >= 0.7 * src_mean && ad_mean <= 1.3 * src_mean;
  const bool mgdt_flat = std::abs(mK - m1) <= c1 + cK;
  record(5, improves && entropy_falls && ad_tracks_source && mgdt_flat,
         fmt("dark_room desk: icee ep20 %.2f vs ep1 %.2f (>= 2x), entropy Spearman %.2f "
             "(< -0.5), ad %.2f vs source %.2f (+-30%%), mgdt |%.2f - %.2f| <= %.2f",
             epK, ep1, rho, ad_mean, src_mean, mK, m1, c1 + cK));
}

void criterion_6(const std::string& workdir) {
  const std::string out = workdir + "/biased";
  std::fprintf(stderr, "[run] training icee / icee-biased on dark_room_biased...\n");
  harness::RunConfig icee_cfg = grid_cfg("icee", "dark_room_biased", 301, out);
  harness::RunConfig biased_cfg = grid_cfg("icee-biased", "dark_room_biased", 301, out);
  harness::train(icee_cfg);
  harness::train(biased_cfg);

  std::fprintf(stderr, "[run] evaluating on right-side goals (100 tasks each)...\n");
  const harness::GridEval icee_ev = evaluate_with_kappa_sweep(icee_cfg);
  const harness::GridEval biased_ev = evaluate_with_kappa_sweep(biased_cfg);

  const double mi = harness::mean_of(icee_ev.rets.back());
  const double mb = harness::mean_of(biased_ev.rets.back());
  const double ci = harness::ci95_halfwidth(icee_ev.rets.back());
  const double cb = harness::ci95_halfwidth(biased_ev.rets.back());
  record(6, mi - mb > ci + cb,
         fmt("biased correction: final-episode return icee %.2f (+-%.2f) vs icee-biased "
             "%.2f (+-%.2f), non-overlapping CIs",
             mi, ci, mb, cb));
}

// ---------------------------------------------------------------------------
// criterion 7: the always-on property suite

void criterion_7() {
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  // causality exactness on a random model
  {
    model::TokenLayout lay;
    lay.bins = 16;
    lay.obs_vocab = 25;
    lay.n_actions = 5;
    lay.max_episode_len = 6;
    lay.max_ctx = 3 * (6 * 5 + 1);
    model::ModelConfig mc;
    mc.trunk = {2, 32, 4, lay.max_ctx};
    mc.layout = lay;
    model::ModelParams<float> P;
    P.init(mc, 71);
    Rng rng(72);
    TaskSequence seq;
    for (int k = 0; k < 3; ++k) {
      seq.episode_lengths.push_back(6);
      for (int t = 0; t < 6; ++t) {
        StepRecord s;
        s.obs = rng.uniform_int(25);
        s.action = rng.uniform_int(5);
        s.reward = rng.bernoulli(0.5);
        s.log = {s.action, 0.4, 0.2};
        s.ret = {rng.uniform_int(2), 0.0, rng.uniform_int(16)};
        seq.steps.push_back(s);
      }
    }
    const auto enc = model::encode_task_sequence(seq, lay);
    model::ModelWorkspace<float> ws, ws2;
    const Matf base = model::forward_action(P, enc.action_stream, nullptr, ws);
    model::Stream mutated = enc.action_stream;
    mutated.back().id = model::action_vocab(lay).obs(3);
    const Matf other = model::forward_action(P, mutated, nullptr, ws2);
    bool exact = true;
    for (int p = 0; p < base.rows() - 1 && exact; ++p)
      exact = std::memcmp(base.row(p).data(), other.row(p).data(),
                          sizeof(float) * base.cols()) == 0;
    check(exact, "causality exactness");

    // checkpoint round-trip bit stability
    const std::string dir = "/tmp/icee_accept_ckpt";
    std::filesystem::create_directories(dir);
    model::Checkpoint ck;
    ck.params = P;
    ck.meta = {{"mode", "icee"}, {"domain", "dark_room"}};
    save_checkpoint(ck, dir + "/a.bin");
    const model::Checkpoint ld = model::load_checkpoint(dir + "/a.bin");
    save_checkpoint(ld, dir + "/b.bin");
    std::ifstream fa(dir + "/a.bin", std::ios::binary), fb(dir + "/b.bin", std::ios::binary);
    const std::string ba((std::istreambuf_iterator<char>(fa)), {});
    const std::string bb((std::istreambuf_iterator<char>(fb)), {});
    check(ba == bb && !ba.empty(), "checkpoint byte stability");
    model::ModelWorkspace<float> ws3;
    const Matf reload = model::forward_action(ld.params, enc.action_stream, nullptr, ws3);
    check(std::memcmp(base.data(), reload.data(), sizeof(float) * base.size()) == 0,
          "checkpoint forward bit identity");
  }

  // rtg recurrence, relabel idempotence, flags vs brute force: 1000 randoms
  {
    Rng rng(73);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      const int K = 1 + rng.uniform_int(8);
      TaskSequence seq;
      for (int k = 0; k < K; ++k) {
        const int len = 1 + rng.uniform_int(10);
        seq.episode_lengths.push_back(len);
        for (int t = 0; t < len; ++t) {
          StepRecord s;
          s.reward = rng.bernoulli(0.4) ? 1.0 : 0.0;
          seq.steps.push_back(s);
        }
      }
      const rtg::BinningSpec spec{-1.0, 10.0, 64};
      const TaskSequence lab = rtg::relabel_sequence(seq, spec, true);
      const TaskSequence lab2 = rtg::relabel_sequence(lab, spec, true);
      int off = 0;
      std::vector<double> ep_rets;
      for (int k = 0; k < K; ++k) {
        const int len = lab.episode_lengths[k];
        double total = 0;
        for (int t = 0; t < len; ++t) total += lab.steps[off + t].reward;
        ep_rets.push_back(total);
        for (int t = 0; t < len; ++t) {
          const double r = lab.steps[off + t].reward;
          const double shaped = r != 1.0 ? -1.0 / len : r;
          const double next = t + 1 < len ? lab.steps[off + t + 1].ret.rtg : 0.0;
          ok &= lab.steps[off + t].ret.rtg == shaped + next;
          ok &= lab.steps[off + t].ret.cross_flag == lab2.steps[off + t].ret.cross_flag;
          ok &= lab.steps[off + t].ret.rtg == lab2.steps[off + t].ret.rtg;
        }
        off += len;
      }
      double best = -1e300;
      off = 0;
      for (int k = 0; k < K; ++k) {
        const int expected = ep_rets[k] > best ? 1 : 0;
        best = std::max(best, ep_rets[k]);
        ok &= lab.steps[off].ret.cross_flag == expected;
        off += lab.episode_lengths[k];
      }
    }
    check(ok, "rtg recurrence / relabel idempotence / flags vs brute force");
  }

  // q(c) stochastic dominance
  {
    Rng rng(74);
    bool ok = true;
    const rtg::BinningSpec spec{-1.0, 5.0, 32};
    for (double kappa : {0.1, 1.0, 5.0}) {
      for (int trial = 0; trial < 100 && ok; ++trial) {
        Vecd p(32);
        double z = 0;
        for (int b = 0; b < 32; ++b) {
          p[b] = rng.uniform() + 1e-6;
          z += p[b];
        }
        p /= z;
        const Vecd q = infer::augmented_return_distribution(p, spec, kappa, 1e-6);
        double cp = 0, cq = 0;
        for (int b = 0; b < 32; ++b) {
          cp += p[b];
          cq += q[b];
          ok &= cq <= cp + 1e-9;
        }
      }
    }
    check(ok, "kappa-augmented return dominance");
  }

  // EI properties
  {
    Rng rng(75);
    bool ok = true;
    for (int i = 0; i < 500; ++i) {
      const double mu = rng.normal(), best = rng.normal(), var = rng.uniform(0, 4);
      ok &= bo::expected_improvement(mu, var, best) >= 0.0;
    }
    ok &= bo::expected_improvement(1.0, 0.0, 0.5) == 0.0;
    ok &= bo::expected_improvement(0.5, 0.0, 0.5) == 0.0;
    ok &= std::abs(bo::expected_improvement(0.0, 1e-18, 0.0)) < 1e-9;
    check(ok, "EI nonnegativity and zero-variance limit");
  }

  // policy probabilities over every state-goal pair of the 9x9 room
  {
    env::GridSpec s;
    s.variant = env::GridVariant::dark_room;
    bool ok = true;
    Rng rng(76);
    for (int a_cell = 0; a_cell < 81 && ok; ++a_cell) {
      for (int g_cell = 0; g_cell < 81 && ok; ++g_cell) {
        env::GridEnv e(s, {s.cell_of(g_cell), {}});
        e.reset(rng);
        const env::Cell target = s.cell_of(a_cell);
        while (e.pos().x > target.x) e.step(env::kLeft);
        while (e.pos().x < target.x) e.step(env::kRight);
        while (e.pos().y > target.y) e.step(env::kDown);
        while (e.pos().y < target.y) e.step(env::kUp);
        for (double eps : {0.0, 0.5, 1.0}) {
          const auto pc = env::cheating_probs(e, s.cell_of(g_cell), eps);
          const auto pb = env::biased_probs(e, s.cell_of(g_cell), eps);
          double tc = 0, tb = 0;
          for (int a = 0; a < env::kNumActions; ++a) {
            tc += pc[a];
            tb += pb[a];
          }
          ok &= std::abs(tc - 1.0) < 1e-12 && std::abs(tb - 1.0) < 1e-12;
        }
      }
    }
    check(ok, "policy probability normalization over all state-goal pairs");
  }

  // analytic vs finite-difference gradients on a toy model (double)
  {
    model::TokenLayout lay;
    lay.bins = 6;
    lay.obs_vocab = 9;
    lay.n_actions = 5;
    lay.max_episode_len = 3;
    lay.max_ctx = 2 * (3 * 5 + 1);
    model::ModelConfig mc;
    mc.trunk = {2, 16, 2, lay.max_ctx};
    mc.layout = lay;
    model::ModelParams<double> P;
    P.init(mc, 77);
    Rng rng(78);
    TaskSequence seq;
    for (int k = 0; k < 2; ++k) {
      seq.episode_lengths.push_back(3);
      for (int t = 0; t < 3; ++t) {
        StepRecord s;
        s.obs = rng.uniform_int(9);
        s.action = rng.uniform_int(5);
        s.reward = rng.bernoulli(0.5);
        s.log = {s.action, 0.15 + 0.8 * rng.uniform(), 0.0};
        s.ret = {rng.uniform_int(2), 0.0, rng.uniform_int(6)};
        seq.steps.push_back(s);
      }
    }
    const auto enc = model::encode_task_sequence(seq, lay);
    const size_t Ma = enc.action_pos.size(), Mr = enc.return_pos.size();
    auto loss_of = [&](model::ModelParams<double>& Q) {
      model::ModelWorkspace<double> ws;
      const auto logits = model::forward_action(Q, enc.action_stream, nullptr, ws);
      double total = objectives::action_loss_sample(logits, enc, 5, 20.0, true,
                                                    1.0 / double(Ma),
                                                    (nn::Mat<double>*)nullptr);
      const auto rlogits = model::forward_return(Q, enc.return_stream, ws);
      total += objectives::return_model_loss(rlogits, enc, 1.0 / double(Mr));
      return total;
    };
    model::ModelParams<double> G;
    G.zero_like(P);
    {
      model::ModelWorkspace<double> ws;
      const auto logits = model::forward_action(P, enc.action_stream, nullptr, ws);
      nn::Mat<double> dl = nn::Mat<double>::Zero(logits.rows(), logits.cols());
      objectives::action_loss_sample(logits, enc, 5, 20.0, true, 1.0 / double(Ma), &dl);
      model::backward_action(P, enc.action_stream, nullptr, ws, dl, enc.action_pos, G);
      const auto rlogits = model::forward_return(P, enc.return_stream, ws);
      nn::Mat<double> drl = nn::Mat<double>::Zero(rlogits.rows(), rlogits.cols());
      objectives::return_model_loss(rlogits, enc, 1.0 / double(Mr), &drl);
      model::backward_return(P, enc.return_stream, ws, drl, G);
    }
    auto pt = P.tensors();
    auto gt = G.tensors();
    double num = 0, den = 0;
    Rng pick(79);
    const double h = 1e-5;
    for (size_t ti = 0; ti < pt.size(); ++ti) {
      if (pt[ti]->size() == 0) continue;
      for (int probe = 0; probe < 2; ++probe) {
        const int idx = pick.uniform_int(int(pt[ti]->size()));
        double* c = pt[ti]->data() + idx;
        const double orig = *c;
        *c = orig + h;
        const double fp = loss_of(P);
        *c = orig - h;
        const double fm = loss_of(P);
        *c = orig;
        const double fd = (fp - fm) / (2 * h);
        const double an = gt[ti]->data()[idx];
        num += (fd - an) * (fd - an);
        den += an * an;
      }
    }
    check(den > 0 && std::sqrt(num / den) < 1e-3, "gradient vs finite differences");
  }

  std::string detail = "property suite: causality, checkpoint stability, rtg laws, "
                       "q-dominance, EI, policy sums, gradcheck";
  if (!failures.empty()) {
    detail = "property failures:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  record(7, failures.empty(), detail);
}

// ---------------------------------------------------------------------------
// criterion 8 (optional, non-gating): paper-scale stretch report

void criterion_8(const std::string& workdir) {
  if (std::getenv("ICEE_PAPER_STRETCH") == nullptr) {
    record(8, true,
           "paper-scale stretch run skipped (set ICEE_PAPER_STRETCH=1 to train and "
           "report the 9x9 trajectory against the reference table 8.15/12.37/13.61)",
           /*gating=*/false);
    return;
  }
  harness::RunConfig cfg = grid_cfg("icee", "dark_room", 401, workdir + "/stretch");
  cfg.preset = "paper";
  harness::apply_preset(cfg);
  cfg.steps = 20000;
  cfg.batch_size = 4;
  harness::train(cfg);
  const harness::GridEval ev = harness::evaluate_grid(cfg);
  const double r10 = harness::mean_of(ev.rets[9]);
  const double r30 = harness::mean_of(ev.rets[29]);
  const double r50 = harness::mean_of(ev.rets[49]);
  record(8, true,
         fmt("paper-scale 9x9 returns at episodes 10/30/50: %.2f / %.2f / %.2f "
             "(reference 8.15 / 12.37 / 13.61; CI overlap informational)",
             r10, r30, r50),
         /*gating=*/false);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  std::set<int> only;
  if (const char* env = std::getenv("ICEE_ACCEPT_ONLY")) {
    std::stringstream ss(env);
    std::string tok;
    while (std::getline(ss, tok, ',')) only.insert(std::atoi(tok.c_str()));
  }
  auto enabled = [&](int id) { return only.empty() || only.count(id); };

  const std::string workdir = "/tmp/icee_acceptance";
  std::filesystem::create_directories(workdir);

  try {
    if (enabled(7)) criterion_7();
    if (enabled(1)) criterion_1();
    if (enabled(2)) criterion_2();
    if (enabled(3) || enabled(4)) criteria_3_4(workdir);
    if (enabled(5)) criterion_5(workdir);
    if (enabled(6)) criterion_6(workdir);
    if (enabled(8)) criterion_8(workdir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance suite aborted: %s\n", e.what());
    std::printf("ABORTED: %s\n", e.what());
    return 99;
  }

  std::sort(g_results.begin(), g_results.end(),
            [](const Result& a, const Result& b) { return a.id < b.id; });
  int failures = 0;
  std::printf("==== acceptance criteria ====\n");
  for (const auto& r : g_results) {
    const char* tag = r.pass ? "PASS" : (r.gating ? "FAIL" : "info");
    std::printf("[%s] criterion %d: %s\n", tag, r.id, r.detail.c_str());
    if (!r.pass && r.gating) ++failures;
  }
  std::printf("==== %d failed, %zu reported, %.1f minutes ====\n", failures,
              g_results.size(), minutes_since(t0));
  return failures;
}
