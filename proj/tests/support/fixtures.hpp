#pragma once

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include <filesystem>
#include <random>
#include <string>

#include "s2r/core/config.hpp"

namespace s2r::testing {

inline torch::Generator gen(std::uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("s2r_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small, fast config for training tests.
inline RunConfig tiny_config() {
  RunConfig cfg = default_run_config();
  cfg.seed = 11;
  cfg.train_resolution = 16;
  cfg.message_length = 8;
  cfg.batch_size = 4;
  cfg.generator.base_channels = 4;
  cfg.generator.latent_dim = 2;
  cfg.discriminator.base_channels = 4;
  cfg.codec.channels = 8;
  cfg.codec.blocks = 1;
  cfg.perceptual.channels = 4;
  cfg.s2r.steps = 4;
  cfg.s2r.checkpoint_every = 2;
  cfg.watermark.steps = 4;
  cfg.watermark.checkpoint_every = 2;
  cfg.supervised.steps = 4;
  cfg.supervised.checkpoint_every = 2;
  return cfg;
}

}  // namespace s2r::testing
