#pragma once

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace s2r::train {

inline constexpr int kCheckpointVersion = 1;

/// A checkpoint is a directory holding meta.json (version, kind, step, seed,
/// architecture and run config) plus one archive per module and optimizer.
struct CheckpointMeta {
  int version = kCheckpointVersion;
  std::string kind;        // "s2r", "s2r_supervised", "codec"
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;   // full RunConfig snapshot
};

/// Writes into a temporary sibling and renames, so an interrupted save never
/// replaces the previous checkpoint with a partial one.
void save_checkpoint(const std::filesystem::path& dir, const CheckpointMeta& meta,
                     const std::map<std::string, torch::nn::Module*>& modules,
                     const std::map<std::string, torch::optim::Optimizer*>& optimizers = {});

/// Throws ConfigError on a missing directory or unsupported version.
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir);

/// Loads the named archives into already-constructed modules and optimizers.
void load_checkpoint(const std::filesystem::path& dir,
                     const std::map<std::string, torch::nn::Module*>& modules,
                     const std::map<std::string, torch::optim::Optimizer*>& optimizers = {});

}  // namespace s2r::train
