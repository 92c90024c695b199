#pragma once

#include <string>
#include <vector>

#include "icee/common.hpp"
#include "icee/rtg.hpp"
#include "icee/types.hpp"

namespace icee::model {

// Per-step token order. RL steps are [ctilde, c, o, a, r] (mode-dependent
// subsets) with an episode-boundary token closing every episode; BO steps are
// [ctilde, a, r] with no boundary (every step is its own episode). Action
// logits are read at the token immediately preceding the action token; return
// logits at the observation token of the return stream.
struct TokenLayout {
  bool bo_mode = false;
  bool include_ctilde = true;
  bool include_c = true;
  int bins = 64;
  int obs_vocab = 81;
  int n_actions = 5;
  int max_episode_len = 20;
  int max_ctx = 1024;

  bool has_return_model() const { return include_c; }

  int action_block() const {
    if (bo_mode) return 3;  // [ctilde, a, r]
    return 2 + (include_ctilde ? 1 : 0) + (include_c ? 1 : 0) + 1;  // [.., o, a, r]
  }
  int return_block() const { return bo_mode ? 0 : 2 + (include_ctilde ? 1 : 0) + 1; }

  // offset of the action-prediction position within a step block
  int action_pred_offset() const { return bo_mode ? 0 : action_block() - 3; }
  int return_pred_offset() const { return include_ctilde ? 1 : 0; }

  void validate() const {
    if (bo_mode) {
      if (!include_ctilde || include_c)
        throw ConfigError("BO layout uses the cross-episode flag only");
    } else {
      if (obs_vocab < 1 || n_actions < 2) throw ConfigError("invalid RL layout");
    }
    if (include_c && bins < 2) throw ConfigError("layout needs at least 2 return bins");
    if (max_ctx < action_block() + 1) throw ConfigError("context too short for one step");
  }
};

// Discrete-token id assignment for one trunk's vocabulary.
struct VocabMap {
  int eb = -1;
  int ctilde0 = -1;
  int cbin0 = -1;
  int obs0 = -1;
  int act0 = -1;
  int rew0 = -1;
  int size = 0;

  int ctilde(int flag) const { return ctilde0 + flag; }
  int cbin(int bin) const { return cbin0 + bin; }
  int obs(int o) const { return obs0 + o; }
  int act(int a) const { return act0 + a; }
  int rew(int r) const { return rew0 + r; }
};

inline VocabMap action_vocab(const TokenLayout& layout) {
  VocabMap v;
  int next = 0;
  if (layout.bo_mode) {
    v.ctilde0 = next;
    next += 2;
    v.size = next;
    return v;
  }
  v.eb = next++;
  if (layout.include_ctilde) {
    v.ctilde0 = next;
    next += 2;
  }
  if (layout.include_c) {
    v.cbin0 = next;
    next += layout.bins;
  }
  v.obs0 = next;
  next += layout.obs_vocab;
  v.act0 = next;
  next += layout.n_actions;
  v.rew0 = next;
  next += 2;
  v.size = next;
  return v;
}

inline VocabMap return_vocab(const TokenLayout& layout) {
  VocabMap v;
  if (!layout.has_return_model() || layout.bo_mode) return v;
  int next = 0;
  v.eb = next++;
  if (layout.include_ctilde) {
    v.ctilde0 = next;
    next += 2;
  }
  v.obs0 = next;
  next += layout.obs_vocab;
  v.act0 = next;
  next += layout.n_actions;
  v.rew0 = next;
  next += 2;
  v.size = next;
  return v;
}

struct Token {
  enum Kind { kDisc, kLoc, kVal };
  Kind kind = kDisc;
  int id = 0;       // discrete token id, or candidate row for kLoc
  float value = 0;  // payload for kVal
};

using Stream = std::vector<Token>;

struct EncodedTask {
  Stream action_stream;
  std::vector<int> action_pos;
  std::vector<int> action_targets;
  std::vector<double> behavior_probs;
  Stream return_stream;
  std::vector<int> return_pos;
  std::vector<int> return_targets;
};

inline EncodedTask encode_task_sequence(const TaskSequence& seq, const TokenLayout& layout) {
  layout.validate();
  seq.validate();
  const VocabMap va = action_vocab(layout);
  const VocabMap vr = return_vocab(layout);
  EncodedTask enc;

  int step_idx = 0;
  for (int k = 0; k < seq.episode_count(); ++k) {
    const int len = seq.episode_lengths[k];
    if (!layout.bo_mode && len > layout.max_episode_len)
      throw DataError("episode longer than the configured episode length");
    for (int t = 0; t < len; ++t, ++step_idx) {
      const StepRecord& s = seq.steps[step_idx];
      if (s.ret.cross_flag != 0 && s.ret.cross_flag != 1)
        throw DataError("step carries no valid return pair (cross flag)");
      if (layout.include_c && (s.ret.rtg_token < 0 || s.ret.rtg_token >= layout.bins))
        throw DataError("step carries no valid return pair (rtg token)");

      if (layout.bo_mode) {
        enc.action_pos.push_back(int(enc.action_stream.size()));
        enc.action_stream.push_back({Token::kDisc, va.ctilde(s.ret.cross_flag), 0});
        enc.action_targets.push_back(s.action);
        enc.behavior_probs.push_back(s.log.prob);
        enc.action_stream.push_back({Token::kLoc, s.action, 0});
        enc.action_stream.push_back({Token::kVal, 0, float(s.reward)});
        continue;
      }

      if (s.obs < 0 || s.obs >= layout.obs_vocab) throw DataError("observation out of range");
      if (s.action < 0 || s.action >= layout.n_actions) throw DataError("action out of range");
      const int r = s.reward != 0.0 ? 1 : 0;

      if (layout.include_ctilde)
        enc.action_stream.push_back({Token::kDisc, va.ctilde(s.ret.cross_flag), 0});
      if (layout.include_c)
        enc.action_stream.push_back({Token::kDisc, va.cbin(s.ret.rtg_token), 0});
      enc.action_pos.push_back(int(enc.action_stream.size()));
      enc.action_stream.push_back({Token::kDisc, va.obs(s.obs), 0});
      enc.action_targets.push_back(s.action);
      enc.behavior_probs.push_back(s.log.prob);
      enc.action_stream.push_back({Token::kDisc, va.act(s.action), 0});
      enc.action_stream.push_back({Token::kDisc, va.rew(r), 0});

      if (layout.has_return_model()) {
        if (layout.include_ctilde)
          enc.return_stream.push_back({Token::kDisc, vr.ctilde(s.ret.cross_flag), 0});
        enc.return_pos.push_back(int(enc.return_stream.size()));
        enc.return_stream.push_back({Token::kDisc, vr.obs(s.obs), 0});
        enc.return_targets.push_back(s.ret.rtg_token);
        enc.return_stream.push_back({Token::kDisc, vr.act(s.action), 0});
        enc.return_stream.push_back({Token::kDisc, vr.rew(r), 0});
      }
    }
    if (!layout.bo_mode) {
      enc.action_stream.push_back({Token::kDisc, va.eb, 0});
      if (layout.has_return_model()) enc.return_stream.push_back({Token::kDisc, vr.eb, 0});
    }
  }
  return enc;
}

// Token-level inverse of encode_task_sequence (RL streams). Return-to-go
// reals come back as bin centers.
inline TaskSequence decode_task_sequence(const EncodedTask& enc, const TokenLayout& layout,
                                         const rtg::BinningSpec& spec) {
  if (layout.bo_mode) throw ModeError("decode_task_sequence handles RL layouts");
  const VocabMap va = action_vocab(layout);
  TaskSequence seq;
  int ep_len = 0;
  size_t p = 0;
  const size_t block = size_t(layout.action_block());
  while (p < enc.action_stream.size()) {
    if (enc.action_stream[p].id == va.eb) {
      seq.episode_lengths.push_back(ep_len);
      ep_len = 0;
      ++p;
      continue;
    }
    if (p + block > enc.action_stream.size()) throw DataError("truncated action stream");
    StepRecord s;
    size_t q = p;
    if (layout.include_ctilde) s.ret.cross_flag = enc.action_stream[q++].id - va.ctilde0;
    if (layout.include_c) {
      s.ret.rtg_token = enc.action_stream[q++].id - va.cbin0;
      s.ret.rtg = rtg::detokenize_return(s.ret.rtg_token, spec);
    }
    s.obs = enc.action_stream[q++].id - va.obs0;
    s.action = enc.action_stream[q++].id - va.act0;
    s.reward = double(enc.action_stream[q++].id - va.rew0);
    seq.steps.push_back(s);
    ++ep_len;
    p = q;
  }
  if (ep_len != 0) throw DataError("action stream missing final episode boundary");
  return seq;
}

}  // namespace icee::model
