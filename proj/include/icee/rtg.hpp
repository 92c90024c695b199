#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "icee/common.hpp"
#include "icee/types.hpp"

namespace icee::rtg {

// Uniform binning of in-episode returns-to-go onto [c_min, c_max].
struct BinningSpec {
  double c_min = -1.0;
  double c_max = 1.0;
  int bins = 64;

  void validate() const {
    if (!(c_min < c_max)) throw ConfigError("binning spec requires c_min < c_max");
    if (bins < 2) throw ConfigError("binning spec requires at least 2 bins");
  }
  double bin_width() const { return (c_max - c_min) / bins; }
};

// Inclusive suffix sums of the (optionally shaped) rewards: c_t = r'_t + c_{t+1}.
// Shaping replaces every zero reward by -1/T; unit rewards pass through.
inline std::vector<double> in_episode_rtg(const std::vector<double>& rewards,
                                          bool shaping, int T) {
  if (rewards.empty()) throw InputError("in_episode_rtg: empty reward list");
  if (int(rewards.size()) != T)
    throw InputError("in_episode_rtg: rewards length must equal episode length");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (int t = int(rewards.size()) - 1; t >= 0; --t) {
    const double r = rewards[t];
    const double shaped = (shaping && r != 1.0) ? -1.0 / double(T) : r;
    acc += shaped;
    out[t] = acc;
  }
  return out;
}

// Cross-episode improvement flags: flag_k = 1 iff the episode return strictly
// beats every earlier one; the empty maximum counts as -inf, so flag_1 = 1.
inline std::vector<int> cross_episode_flags(const std::vector<double>& episode_returns) {
  if (episode_returns.empty()) throw InputError("cross_episode_flags: empty input");
  std::vector<int> flags(episode_returns.size());
  double best = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < episode_returns.size(); ++k) {
    flags[k] = episode_returns[k] > best ? 1 : 0;
    best = std::max(best, episode_returns[k]);
  }
  return flags;
}

// Values outside [c_min, c_max] clamp to the boundary bins; c_max maps to the
// last bin rather than one past it.
inline int tokenize_return(double c, const BinningSpec& spec) {
  spec.validate();
  if (c <= spec.c_min) return 0;
  if (c >= spec.c_max) return spec.bins - 1;
  int bin = int((c - spec.c_min) / spec.bin_width());
  return std::clamp(bin, 0, spec.bins - 1);
}

inline double detokenize_return(int bin, const BinningSpec& spec) {
  spec.validate();
  if (bin < 0 || bin >= spec.bins) throw InputError("detokenize_return: bin out of range");
  return spec.c_min + (bin + 0.5) * spec.bin_width();
}

// Overwrites every step's ReturnPair with ground truth computed from the
// complete episodes. Idempotent.
inline TaskSequence relabel_sequence(TaskSequence seq, const BinningSpec& spec,
                                     bool shaping) {
  seq.validate();
  std::vector<double> episode_returns;
  episode_returns.reserve(seq.episode_count());
  for (int k = 0; k < seq.episode_count(); ++k) {
    auto [begin, end] = seq.episode_range(k);
    double total = 0.0;
    for (int s = begin; s < end; ++s) total += seq.steps[s].reward;
    episode_returns.push_back(total);
  }
  const std::vector<int> flags = cross_episode_flags(episode_returns);
  for (int k = 0; k < seq.episode_count(); ++k) {
    auto [begin, end] = seq.episode_range(k);
    std::vector<double> rewards;
    rewards.reserve(end - begin);
    for (int s = begin; s < end; ++s) rewards.push_back(seq.steps[s].reward);
    const auto rtgs = in_episode_rtg(rewards, shaping, int(rewards.size()));
    for (int s = begin; s < end; ++s) {
      StepRecord& step = seq.steps[s];
      step.ret.cross_flag = flags[k];
      step.ret.rtg = rtgs[s - begin];
      step.ret.rtg_token = tokenize_return(step.ret.rtg, spec);
    }
  }
  return seq;
}

}  // namespace icee::rtg
