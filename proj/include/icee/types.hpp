#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "icee/common.hpp"

namespace icee {

// (cross-episode flag, in-episode return-to-go, its bin token).
struct ReturnPair {
  int cross_flag = 0;   // 1 iff this episode's return beats every earlier one
  double rtg = 0.0;     // inclusive suffix sum of (possibly shaped) rewards
  int rtg_token = 0;    // bin index under the active BinningSpec
};

struct PolicyLog {
  int action = 0;
  double prob = 1.0;     // behavior probability of the taken action, in (0, 1]
  double epsilon = 0.0;  // per-episode exploration parameter of the collector
};

// One interaction step. In BO mode `obs` is unused and `action` indexes the
// candidate set; `reward` is the negated standardized function value.
struct StepRecord {
  int obs = 0;
  int action = 0;
  double reward = 0.0;
  PolicyLog log;
  ReturnPair ret;
};

// K concatenated episodes of one task.
struct TaskSequence {
  std::vector<StepRecord> steps;
  std::vector<int> episode_lengths;

  int episode_count() const { return int(episode_lengths.size()); }
  int total_steps() const { return int(steps.size()); }

  // [begin, end) step-index range of episode k.
  std::pair<int, int> episode_range(int k) const {
    int begin = 0;
    for (int j = 0; j < k; ++j) begin += episode_lengths[j];
    return {begin, begin + episode_lengths[k]};
  }

  void validate() const {
    int total = 0;
    for (int len : episode_lengths) {
      if (len <= 0) throw DataError("task sequence has an empty episode");
      total += len;
    }
    if (total != int(steps.size()))
      throw DataError("episode lengths do not add up to the step count");
  }
};

// N candidate locations in the unit hypercube with hidden function values.
struct CandidateSet {
  Matd locations;              // N x d, rows in [0, 1]^d
  Vecd values;                 // hidden standardized function values
  std::vector<char> queried;   // query mask, grows during a run
  std::string provenance;      // "gp-sample" or a benchmark name
  uint64_t seed = 0;

  int size() const { return int(locations.rows()); }
  int dim() const { return int(locations.cols()); }

  void validate() const {
    if (size() < 2) throw DataError("candidate set needs at least two locations");
    if (values.size() != size()) throw ShapeError("locations/values size mismatch");
    if ((locations.array() < -1e-12).any() || (locations.array() > 1.0 + 1e-12).any())
      throw DataError("candidate locations must lie in the unit cube");
    if (!values.allFinite()) throw DataError("candidate values must be finite");
  }

  int unqueried_count() const {
    int n = 0;
    for (char q : queried) n += q == 0;
    return n;
  }
};

}  // namespace icee
