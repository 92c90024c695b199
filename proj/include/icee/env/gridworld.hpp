#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "icee/common.hpp"
#include "icee/rng.hpp"
#include "icee/rtg.hpp"
#include "icee/types.hpp"

namespace icee::env {

enum class GridVariant { dark_room, dark_room_hard, key_to_door, dark_room_biased_eval };

inline std::string variant_name(GridVariant v) {
  switch (v) {
    case GridVariant::dark_room: return "dark_room";
    case GridVariant::dark_room_hard: return "dark_room_hard";
    case GridVariant::key_to_door: return "key_to_door";
    case GridVariant::dark_room_biased_eval: return "dark_room_biased";
  }
  return "?";
}

inline GridVariant variant_from_name(const std::string& s) {
  if (s == "dark_room") return GridVariant::dark_room;
  if (s == "dark_room_hard") return GridVariant::dark_room_hard;
  if (s == "key_to_door") return GridVariant::key_to_door;
  if (s == "dark_room_biased") return GridVariant::dark_room_biased_eval;
  throw ConfigError("unknown grid variant: " + s);
}

// left, right, up, down, stay
enum Action : int { kLeft = 0, kRight = 1, kUp = 2, kDown = 3, kStay = 4 };
constexpr int kNumActions = 5;

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

struct GridSpec {
  GridVariant variant = GridVariant::dark_room;
  int width = 9;
  int height = 9;
  int episode_len = 20;  // 50 for key_to_door

  int cells() const { return width * height; }
  int obs_token(Cell c) const { return c.y * width + c.x; }
  Cell cell_of(int token) const { return {token % width, token / width}; }
  Cell midpoint() const { return {(width - 1) / 2, (height - 1) / 2}; }

  double max_return() const {
    switch (variant) {
      case GridVariant::dark_room:
      case GridVariant::dark_room_biased_eval: return double(episode_len);
      case GridVariant::dark_room_hard: return 1.0;
      case GridVariant::key_to_door: return 2.0;
    }
    return 1.0;
  }

  rtg::BinningSpec binning() const { return {-1.0, max_return(), 64}; }

  bool uses_key() const { return variant == GridVariant::key_to_door; }

  // Goal region used when sampling evaluation tasks for the biased variant:
  // the rightmost third of the room (x > 2(W-1)/3; on 9x9 this is x > 5).
  bool in_biased_eval_region(Cell c) const { return 3 * c.x > 2 * (width - 1); }
};

// Hidden task parameter: the goal (and key) placement, fixed for all episodes
// of one task.
struct GridTask {
  Cell goal;
  Cell key;  // meaningful only for key_to_door
};

inline GridTask sample_task(const GridSpec& spec, Rng& rng, bool eval_restricted = false) {
  GridTask task;
  auto sample_cell = [&] {
    return Cell{rng.uniform_int(spec.width), rng.uniform_int(spec.height)};
  };
  task.goal = sample_cell();
  if (spec.variant == GridVariant::dark_room_biased_eval && eval_restricted) {
    while (!spec.in_biased_eval_region(task.goal)) task.goal = sample_cell();
  }
  if (spec.uses_key()) {
    task.key = sample_cell();
    while (task.key == task.goal) task.key = sample_cell();
  }
  return task;
}

struct StepResult {
  int obs = 0;
  double reward = 0.0;
  bool done = false;
};

class GridEnv {
 public:
  GridEnv(GridSpec spec, GridTask task) : spec_(spec), task_(task) {}

  // Dark-room variants restart at the midpoint; key_to_door restarts at a
  // uniformly random cell. Per-episode reward flags reset; the task does not.
  int reset(Rng& rng) {
    pos_ = spec_.uses_key()
               ? Cell{rng.uniform_int(spec_.width), rng.uniform_int(spec_.height)}
               : spec_.midpoint();
    t_ = 0;
    done_ = false;
    goal_rewarded_ = false;
    key_collected_ = false;
    door_rewarded_ = false;
    return spec_.obs_token(pos_);
  }

  StepResult step(int action) {
    if (done_) throw StateError("step called on a finished episode");
    if (action < 0 || action >= kNumActions) throw InputError("invalid grid action");
    pos_ = moved(pos_, action);
    double reward = 0.0;
    switch (spec_.variant) {
      case GridVariant::dark_room:
      case GridVariant::dark_room_biased_eval:
        if (pos_ == task_.goal) reward = 1.0;
        break;
      case GridVariant::dark_room_hard:
        if (pos_ == task_.goal && !goal_rewarded_) {
          reward = 1.0;
          goal_rewarded_ = true;
        }
        break;
      case GridVariant::key_to_door:
        if (!key_collected_) {
          if (pos_ == task_.key) {
            reward = 1.0;
            key_collected_ = true;
          }
        } else if (!door_rewarded_ && pos_ == task_.goal) {
          reward = 1.0;
          door_rewarded_ = true;
        }
        break;
    }
    ++t_;
    done_ = t_ >= spec_.episode_len;
    return {spec_.obs_token(pos_), reward, done_};
  }

  Cell moved(Cell c, int action) const {
    switch (action) {
      case kLeft: c.x = std::max(0, c.x - 1); break;
      case kRight: c.x = std::min(spec_.width - 1, c.x + 1); break;
      case kUp: c.y = std::min(spec_.height - 1, c.y + 1); break;
      case kDown: c.y = std::max(0, c.y - 1); break;
      case kStay: break;
    }
    return c;
  }

  // Target the collector chases: the key until it is collected, else the goal.
  Cell collector_target() const {
    if (spec_.uses_key() && !key_collected_) return task_.key;
    return task_.goal;
  }

  const GridSpec& spec() const { return spec_; }
  const GridTask& task() const { return task_; }
  Cell pos() const { return pos_; }
  bool done() const { return done_; }
  int steps_taken() const { return t_; }

 private:
  GridSpec spec_;
  GridTask task_;
  Cell pos_{};
  int t_ = 0;
  bool done_ = true;
  bool goal_rewarded_ = false;
  bool key_collected_ = false;
  bool door_rewarded_ = false;
};

inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

// Probability vector of the epsilon-greedy "cheating" policy. A+ holds the
// actions that strictly reduce the Manhattan distance to the target (clamping
// counts as not moving); on the target A+ = {stay}. Mass 1-eps spreads
// uniformly over A+, eps over the complement.
inline std::array<double, kNumActions> cheating_probs(const GridEnv& env, Cell target,
                                                      double eps) {
  std::array<bool, kNumActions> closer{};
  const int d0 = manhattan(env.pos(), target);
  if (d0 == 0) {
    closer[kStay] = true;
  } else {
    for (int a = 0; a < kNumActions; ++a)
      closer[a] = manhattan(env.moved(env.pos(), a), target) < d0;
  }
  int n_plus = 0;
  for (bool c : closer) n_plus += c;
  const int n_minus = kNumActions - n_plus;
  std::array<double, kNumActions> probs{};
  for (int a = 0; a < kNumActions; ++a)
    probs[a] = closer[a] ? (1.0 - eps) / n_plus : eps / n_minus;
  return probs;
}

// Biased collector: 2/3 "left" mixed with 1/3 of the cheating policy.
inline std::array<double, kNumActions> biased_probs(const GridEnv& env, Cell target,
                                                    double eps) {
  auto probs = cheating_probs(env, target, eps);
  for (auto& p : probs) p /= 3.0;
  probs[kLeft] += 2.0 / 3.0;
  return probs;
}

enum class CollectorKind { cheating, biased };

inline std::pair<int, double> sample_policy(const std::array<double, kNumActions>& probs,
                                            Rng& rng) {
  const int a = rng.categorical(probs);
  return {a, probs[a]};
}

// Runs the collector for K episodes on one task and returns the relabeled
// sequence. Epsilon is redrawn uniformly from [0, 1) for every episode.
inline TaskSequence collect_task(const GridSpec& spec, const GridTask& task, int episodes,
                                 CollectorKind kind, Rng& rng) {
  if (episodes < 1) throw InputError("collect_task: need at least one episode");
  GridEnv env(spec, task);
  TaskSequence seq;
  for (int k = 0; k < episodes; ++k) {
    const double eps = rng.uniform();
    int obs = env.reset(rng);
    for (int t = 0; t < spec.episode_len; ++t) {
      const Cell target = env.collector_target();
      const auto probs = kind == CollectorKind::cheating ? cheating_probs(env, target, eps)
                                                         : biased_probs(env, target, eps);
      const auto [action, prob] = sample_policy(probs, rng);
      StepRecord rec;
      rec.obs = obs;
      rec.action = action;
      rec.log = {action, prob, eps};
      const StepResult res = env.step(action);
      rec.reward = res.reward;
      seq.steps.push_back(rec);
      obs = res.obs;
    }
    seq.episode_lengths.push_back(spec.episode_len);
  }
  return rtg::relabel_sequence(std::move(seq), spec.binning(), /*shaping=*/true);
}

}  // namespace icee::env
