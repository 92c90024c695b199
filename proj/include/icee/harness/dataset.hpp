#pragma once

// Persisted grid-world dataset: one header line, then per-task blocks.
// Field order per step line (documented, stable):
//   step <episode> <t> <obs> <action> <reward> <pi> <eps> <ctilde> <c> <ctok>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "icee/common.hpp"
#include "icee/env/gridworld.hpp"
#include "icee/types.hpp"

namespace icee::harness {

inline constexpr const char* kDatasetMagic = "#icee-dataset v1 ";

struct Dataset {
  nlohmann::json header;
  std::vector<env::GridTask> tasks;
  std::vector<TaskSequence> sequences;
};

inline void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open dataset for writing: " + path);
  out << kDatasetMagic << ds.header.dump() << "\n";
  out.precision(17);
  for (size_t i = 0; i < ds.sequences.size(); ++i) {
    const env::GridTask& task = ds.tasks[i];
    out << "task " << i << " " << task.goal.x << " " << task.goal.y << " " << task.key.x
        << " " << task.key.y << "\n";
    const TaskSequence& seq = ds.sequences[i];
    int step = 0;
    for (int k = 0; k < seq.episode_count(); ++k) {
      for (int t = 0; t < seq.episode_lengths[k]; ++t, ++step) {
        const StepRecord& s = seq.steps[step];
        out << "step " << k << " " << t << " " << s.obs << " " << s.action << " "
            << s.reward << " " << s.log.prob << " " << s.log.epsilon << " "
            << s.ret.cross_flag << " " << s.ret.rtg << " " << s.ret.rtg_token << "\n";
      }
    }
  }
  if (!out) throw IoError("failed writing dataset: " + path);
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kDatasetMagic, 0) != 0)
    throw SchemaError("missing dataset header line");
  Dataset ds;
  try {
    ds.header = nlohmann::json::parse(line.substr(std::string(kDatasetMagic).size()));
  } catch (const std::exception& e) {
    throw SchemaError(std::string("unreadable dataset header: ") + e.what());
  }

  TaskSequence seq;
  int cur_episode = -1;
  auto flush = [&] {
    if (!seq.steps.empty()) {
      ds.sequences.push_back(std::move(seq));
      seq = TaskSequence{};
      cur_episode = -1;
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "task") {
      flush();
      int idx;
      env::GridTask task;
      ss >> idx >> task.goal.x >> task.goal.y >> task.key.x >> task.key.y;
      if (!ss) throw SchemaError("malformed task line");
      ds.tasks.push_back(task);
    } else if (tag == "step") {
      int k, t;
      StepRecord s;
      ss >> k >> t >> s.obs >> s.action >> s.reward >> s.log.prob >> s.log.epsilon >>
          s.ret.cross_flag >> s.ret.rtg >> s.ret.rtg_token;
      if (!ss) throw SchemaError("malformed step line");
      s.log.action = s.action;
      if (k != cur_episode) {
        seq.episode_lengths.push_back(0);
        cur_episode = k;
      }
      ++seq.episode_lengths.back();
      seq.steps.push_back(s);
    } else {
      throw SchemaError("unknown dataset line tag: " + tag);
    }
  }
  flush();
  if (ds.tasks.size() != ds.sequences.size())
    throw SchemaError("dataset task/sequence count mismatch");
  for (const auto& q : ds.sequences) q.validate();
  return ds;
}

}  // namespace icee::harness
