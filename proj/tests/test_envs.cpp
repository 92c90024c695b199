#include <catch2/catch_amalgamated.hpp>

#include "icee/env/gridworld.hpp"

using namespace icee;
using namespace icee::env;

namespace {
GridSpec spec_of(GridVariant v, int size = 9) {
  GridSpec s;
  s.variant = v;
  s.width = s.height = size;
  s.episode_len = v == GridVariant::key_to_door ? 50 : 20;
  return s;
}
}  // namespace

TEST_CASE("reset placement") {
  Rng rng(5);
  SECTION("dark room always restarts at the midpoint") {
    GridEnv env(spec_of(GridVariant::dark_room), {{7, 1}, {}});
    for (int k = 0; k < 5; ++k) {
      env.reset(rng);
      REQUIRE(env.pos() == Cell{4, 4});
    }
  }
  SECTION("key_to_door restarts randomly but deterministically under a seed") {
    GridTask task{{7, 1}, {2, 3}};
    GridEnv a(spec_of(GridVariant::key_to_door), task);
    GridEnv b(spec_of(GridVariant::key_to_door), task);
    Rng r1(42), r2(42);
    for (int k = 0; k < 5; ++k) REQUIRE(a.reset(r1) == b.reset(r2));
  }
  SECTION("reset never moves the goal") {
    GridTask task{{7, 1}, {}};
    GridEnv env(spec_of(GridVariant::dark_room), task);
    env.reset(rng);
    REQUIRE(env.task().goal == Cell{7, 1});
    env.reset(rng);
    REQUIRE(env.task().goal == Cell{7, 1});
  }
}

TEST_CASE("step dynamics and rewards") {
  Rng rng(5);
  SECTION("walls clamp") {
    GridEnv env(spec_of(GridVariant::dark_room), {{8, 8}, {}});
    env.reset(rng);
    // walk to the left wall and keep going
    for (int i = 0; i < 6; ++i) env.step(kLeft);
    REQUIRE(env.pos() == Cell{0, 4});
    env.step(kLeft);
    REQUIRE(env.pos() == Cell{0, 4});
  }
  SECTION("dark room pays every step on the goal") {
    GridEnv env(spec_of(GridVariant::dark_room), {{4, 4}, {}});
    env.reset(rng);
    for (int i = 0; i < 3; ++i) REQUIRE(env.step(kStay).reward == 1.0);
  }
  SECTION("hard variant pays once per episode") {
    GridEnv env(spec_of(GridVariant::dark_room_hard), {{4, 5}, {}});
    env.reset(rng);
    REQUIRE(env.step(kUp).reward == 1.0);   // first goal visit
    REQUIRE(env.step(kStay).reward == 0.0);  // still on the goal
    REQUIRE(env.step(kDown).reward == 0.0);
    REQUIRE(env.step(kUp).reward == 0.0);  // revisits stay unrewarded
    env.reset(rng);
    REQUIRE(env.step(kUp).reward == 1.0);  // fresh episode, fresh reward
  }
  SECTION("key before door, each once") {
    GridSpec s = spec_of(GridVariant::key_to_door);
    GridTask task{{4, 6} /*door*/, {4, 5} /*key*/};
    GridEnv env(s, task);
    // force a known start by resetting until the midpoint comes up
    Rng r(1);
    while (env.reset(r) != s.obs_token({4, 4})) {
    }
    REQUIRE(env.step(kUp).reward == 1.0);   // key at (4,5)
    REQUIRE(env.step(kUp).reward == 1.0);   // door at (4,6), after the key
    REQUIRE(env.step(kDown).reward == 0.0);
    REQUIRE(env.step(kUp).reward == 0.0);   // door already consumed
  }
  SECTION("door without key pays nothing") {
    GridSpec s = spec_of(GridVariant::key_to_door);
    GridTask task{{4, 5} /*door*/, {0, 0} /*key*/};
    GridEnv env(s, task);
    Rng r(1);
    while (env.reset(r) != s.obs_token({4, 4})) {
    }
    REQUIRE(env.step(kUp).reward == 0.0);  // on the door, key not collected
  }
  SECTION("episode ends after T steps and further steps are state errors") {
    GridSpec s = spec_of(GridVariant::dark_room);
    GridEnv env(s, {{0, 0}, {}});
    env.reset(rng);
    for (int t = 0; t < s.episode_len; ++t) {
      const auto res = env.step(kStay);
      REQUIRE(res.done == (t == s.episode_len - 1));
    }
    REQUIRE_THROWS_AS(env.step(kStay), StateError);
  }
}

TEST_CASE("cheating policy probabilities") {
  GridSpec s = spec_of(GridVariant::dark_room);
  SECTION("frozen example: goal straight right") {
    GridEnv env(s, {{2, 0}, {}});
    Rng rng(3);
    env.reset(rng);
    // place the agent at (0,0) by walking
    for (int i = 0; i < 8; ++i) env.step(kLeft);
    GridEnv e2(s, {{2, 0}, {}});
    e2.reset(rng);
    for (int i = 0; i < 4; ++i) e2.step(kLeft);
    for (int i = 0; i < 4; ++i) e2.step(kDown);
    REQUIRE(e2.pos() == Cell{0, 0});
    const auto probs = cheating_probs(e2, {2, 0}, 0.5);
    REQUIRE(probs[kRight] == Catch::Approx(0.5));
    for (int a : {kLeft, kUp, kDown, kStay}) REQUIRE(probs[a] == Catch::Approx(0.125));
  }
  SECTION("diagonal goal at epsilon 0 splits between the two approaches") {
    GridEnv env(s, {{5, 5}, {}});
    Rng rng(3);
    env.reset(rng);  // (4,4), goal diagonal up-right
    const auto probs = cheating_probs(env, {5, 5}, 0.0);
    REQUIRE(probs[kRight] == Catch::Approx(0.5));
    REQUIRE(probs[kUp] == Catch::Approx(0.5));
    REQUIRE(probs[kLeft] == 0.0);
    REQUIRE(probs[kDown] == 0.0);
    REQUIRE(probs[kStay] == 0.0);
  }
  SECTION("on the goal the approach set is stay") {
    GridEnv env(s, {{4, 4}, {}});
    Rng rng(3);
    env.reset(rng);
    const auto probs = cheating_probs(env, {4, 4}, 0.2);
    REQUIRE(probs[kStay] == Catch::Approx(0.8));
    for (int a : {kLeft, kRight, kUp, kDown}) REQUIRE(probs[a] == Catch::Approx(0.05));
  }
  SECTION("sampled actions always carry positive probability even at eps=1") {
    GridEnv env(s, {{7, 7}, {}});
    Rng rng(3);
    env.reset(rng);
    const auto probs = cheating_probs(env, {7, 7}, 1.0);
    Rng r(11);
    for (int i = 0; i < 50; ++i) {
      const auto [a, p] = sample_policy(probs, r);
      REQUIRE(p > 0.0);
      REQUIRE(p <= 1.0);
    }
  }
}

TEST_CASE("policy probabilities sum to one over all state/goal pairs") {
  // exhaustive over the full 9x9 grid: every agent cell x every goal cell
  GridSpec s = spec_of(GridVariant::dark_room);
  for (double eps : {0.0, 0.3, 0.7, 1.0}) {
    for (int ax = 0; ax < 9; ++ax)
      for (int ay = 0; ay < 9; ++ay)
        for (int gx = 0; gx < 9; ++gx)
          for (int gy = 0; gy < 9; ++gy) {
            GridEnv env(s, {{gx, gy}, {}});
            Rng rng(1);
            env.reset(rng);
            // teleport by walking (cheap: construct fresh env per position)
            GridEnv e(s, {{gx, gy}, {}});
            e.reset(rng);
            while (e.pos().x > ax) e.step(kLeft);
            while (e.pos().x < ax) e.step(kRight);
            while (e.pos().y > ay) e.step(kDown);
            while (e.pos().y < ay) e.step(kUp);
            double total_c = 0, total_b = 0;
            const auto pc = cheating_probs(e, {gx, gy}, eps);
            const auto pb = biased_probs(e, {gx, gy}, eps);
            for (int a = 0; a < kNumActions; ++a) {
              REQUIRE(pc[a] >= 0.0);
              REQUIRE(pb[a] >= 0.0);
              total_c += pc[a];
              total_b += pb[a];
            }
            REQUIRE(total_c == Catch::Approx(1.0).epsilon(1e-12));
            REQUIRE(total_b == Catch::Approx(1.0).epsilon(1e-12));
          }
  }
}

TEST_CASE("biased policy mixture arithmetic") {
  GridSpec s = spec_of(GridVariant::dark_room);
  SECTION("left not an approach action") {
    // goal straight right of the agent: A+ = {right}, |A-| = 4
    GridEnv e(s, {{6, 4}, {}});
    Rng rng(1);
    e.reset(rng);
    const auto pb = biased_probs(e, {6, 4}, 0.6);
    REQUIRE(pb[kLeft] == Catch::Approx(2.0 / 3.0 + (1.0 / 3.0) * (0.6 / 4.0)));
    const auto pb0 = biased_probs(e, {6, 4}, 0.0);
    REQUIRE(pb0[kRight] == Catch::Approx(1.0 / 3.0));
  }
}

TEST_CASE("collect_task") {
  SECTION("step counts match K x T") {
    GridSpec s = spec_of(GridVariant::dark_room);
    Rng rng(9);
    const GridTask task = sample_task(s, rng);
    const TaskSequence seq = collect_task(s, task, 50, CollectorKind::cheating, rng);
    REQUIRE(seq.total_steps() == 50 * 20);
    REQUIRE(seq.episode_count() == 50);

    GridSpec k2d = spec_of(GridVariant::key_to_door);
    const GridTask task2 = sample_task(k2d, rng);
    const TaskSequence seq2 = collect_task(k2d, task2, 20, CollectorKind::cheating, rng);
    REQUIRE(seq2.total_steps() == 20 * 50);
  }
  SECTION("logged probabilities are in (0,1] and labels are ground truth") {
    GridSpec s = spec_of(GridVariant::dark_room);
    Rng rng(10);
    const GridTask task = sample_task(s, rng);
    const TaskSequence seq = collect_task(s, task, 10, CollectorKind::cheating, rng);
    for (const auto& st : seq.steps) {
      REQUIRE(st.log.prob > 0.0);
      REQUIRE(st.log.prob <= 1.0);
    }
    const TaskSequence again = rtg::relabel_sequence(seq, s.binning(), true);
    for (size_t i = 0; i < seq.steps.size(); ++i) {
      REQUIRE(seq.steps[i].ret.cross_flag == again.steps[i].ret.cross_flag);
      REQUIRE(seq.steps[i].ret.rtg == again.steps[i].ret.rtg);
    }
  }
  SECTION("same seed gives identical sequences") {
    GridSpec s = spec_of(GridVariant::dark_room_hard);
    Rng rng_a(77), rng_b(77);
    const GridTask t1 = sample_task(s, rng_a);
    const GridTask t2 = sample_task(s, rng_b);
    REQUIRE(t1.goal == t2.goal);
    const TaskSequence a = collect_task(s, t1, 8, CollectorKind::cheating, rng_a);
    const TaskSequence b = collect_task(s, t2, 8, CollectorKind::cheating, rng_b);
    REQUIRE(a.steps.size() == b.steps.size());
    for (size_t i = 0; i < a.steps.size(); ++i) {
      REQUIRE(a.steps[i].obs == b.steps[i].obs);
      REQUIRE(a.steps[i].action == b.steps[i].action);
      REQUIRE(a.steps[i].reward == b.steps[i].reward);
      REQUIRE(a.steps[i].log.prob == b.steps[i].log.prob);
    }
  }
  SECTION("reward accounting bounds per variant") {
    Rng rng(31);
    auto episode_returns = [](const TaskSequence& seq) {
      std::vector<double> rets;
      int off = 0;
      for (int len : seq.episode_lengths) {
        double r = 0;
        for (int t = 0; t < len; ++t) r += seq.steps[off + t].reward;
        rets.push_back(r);
        off += len;
      }
      return rets;
    };
    for (int trial = 0; trial < 20; ++trial) {
      GridSpec s = spec_of(GridVariant::dark_room);
      auto rets = episode_returns(collect_task(s, sample_task(s, rng), 5,
                                               CollectorKind::cheating, rng));
      for (double r : rets) {
        REQUIRE(r >= 0.0);
        REQUIRE(r <= 20.0);
      }
      GridSpec h = spec_of(GridVariant::dark_room_hard);
      for (double r : episode_returns(
               collect_task(h, sample_task(h, rng), 5, CollectorKind::cheating, rng)))
        REQUIRE((r == 0.0 || r == 1.0));
      GridSpec k = spec_of(GridVariant::key_to_door);
      for (double r : episode_returns(
               collect_task(k, sample_task(k, rng), 5, CollectorKind::cheating, rng)))
        REQUIRE((r == 0.0 || r == 1.0 || r == 2.0));
    }
  }
}

TEST_CASE("biased evaluation goals sit in the right-hand region") {
  GridSpec s = spec_of(GridVariant::dark_room_biased_eval);
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const GridTask t = sample_task(s, rng, /*eval_restricted=*/true);
    REQUIRE(t.goal.x > 5);  // 9x9: x in {6,7,8}
  }
  // training goals cover the whole room
  bool saw_left = false;
  for (int i = 0; i < 200; ++i)
    saw_left |= sample_task(s, rng, false).goal.x <= 5;
  REQUIRE(saw_left);
}
