#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "icee/common.hpp"
#include "icee/model/model.hpp"

namespace icee::model {

inline constexpr const char* kCkptMagic = "ICEE-CKPT v1";
inline constexpr const char* kCkptTrailer = "ICEE-END";

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
  return {
      {"arch",
       {{"n_layer", cfg.trunk.n_layer},
        {"n_embd", cfg.trunk.n_embd},
        {"n_head", cfg.trunk.n_head},
        {"max_ctx", cfg.trunk.max_ctx}}},
      {"vocab",
       {{"bo_mode", cfg.layout.bo_mode},
        {"include_ctilde", cfg.layout.include_ctilde},
        {"include_c", cfg.layout.include_c},
        {"bins", cfg.layout.bins},
        {"obs_vocab", cfg.layout.obs_vocab},
        {"n_actions", cfg.layout.n_actions},
        {"max_episode_len", cfg.layout.max_episode_len},
        {"bo_dim", cfg.bo_dim},
        {"score_hidden", cfg.score_hidden}}},
      {"init_seed", cfg.init_seed},
  };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  const auto& a = j.at("arch");
  cfg.trunk.n_layer = a.at("n_layer").get<int>();
  cfg.trunk.n_embd = a.at("n_embd").get<int>();
  cfg.trunk.n_head = a.at("n_head").get<int>();
  cfg.trunk.max_ctx = a.at("max_ctx").get<int>();
  const auto& v = j.at("vocab");
  cfg.layout.bo_mode = v.at("bo_mode").get<bool>();
  cfg.layout.include_ctilde = v.at("include_ctilde").get<bool>();
  cfg.layout.include_c = v.at("include_c").get<bool>();
  cfg.layout.bins = v.at("bins").get<int>();
  cfg.layout.obs_vocab = v.at("obs_vocab").get<int>();
  cfg.layout.n_actions = v.at("n_actions").get<int>();
  cfg.layout.max_episode_len = v.at("max_episode_len").get<int>();
  cfg.layout.max_ctx = cfg.trunk.max_ctx;
  cfg.bo_dim = v.at("bo_dim").get<int>();
  cfg.score_hidden = v.at("score_hidden").get<int>();
  cfg.init_seed = j.at("init_seed").get<uint64_t>();
  return cfg;
}

// Versioned container: plain-text header (magic, json descriptor) followed by
// raw float32 blobs in the fixed parameter-collection order.
struct Checkpoint {
  ModelParams<float> params;
  nlohmann::json meta;  // harness-level fields (mode, domain, geometry, ...)
  uint64_t train_seed = 0;
};

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  auto& params = const_cast<ModelParams<float>&>(ckpt.params);
  auto tensors = params.tensors();

  nlohmann::json header = config_to_json(params.cfg);
  header["format_version"] = 1;
  header["train_seed"] = ckpt.train_seed;
  header["tensor_count"] = tensors.size();
  header["meta"] = ckpt.meta.is_null() ? nlohmann::json::object() : ckpt.meta;

  out << kCkptMagic << "\n" << header.dump() << "\n";
  for (auto* t : tensors) {
    const int32_t rows = int32_t(t->rows()), cols = int32_t(t->cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(t->data()), sizeof(float) * t->size());
  }
  out << kCkptTrailer;
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string magic, header_line;
  std::getline(in, magic);
  if (magic != kCkptMagic)
    throw VersionError("unsupported checkpoint version header: '" + magic + "'");
  std::getline(in, header_line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const std::exception& e) {
    throw CorruptionError(std::string("unreadable checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.params.init(config_from_json(header), header.at("init_seed").get<uint64_t>());
  ckpt.train_seed = header.at("train_seed").get<uint64_t>();
  ckpt.meta = header.at("meta");

  auto tensors = ckpt.params.tensors();
  if (header.at("tensor_count").get<size_t>() != tensors.size())
    throw CorruptionError("checkpoint tensor count does not match the descriptor");
  for (auto* t : tensors) {
    int32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) throw CorruptionError("truncated checkpoint (tensor header)");
    if (rows != t->rows() || cols != t->cols())
      throw CorruptionError("tensor shape does not match the architecture descriptor");
    in.read(reinterpret_cast<char*>(t->data()), sizeof(float) * t->size());
    if (!in) throw CorruptionError("truncated checkpoint (tensor data)");
  }
  std::string trailer(std::strlen(kCkptTrailer), '\0');
  in.read(trailer.data(), std::streamsize(trailer.size()));
  if (!in || trailer != kCkptTrailer) throw CorruptionError("missing checkpoint trailer");
  return ckpt;
}

}  // namespace icee::model
