#pragma once

#include <torch/torch.h>

#include "s2r/core/config.hpp"

namespace s2r::translator {

struct DiscriminatorOptions {
  int base_channels = 16;
  int resolution = 128;

  static DiscriminatorOptions from(const RunConfig& cfg);
};

/// Four-layer strided patch critic without normalization layers and without
/// a final sigmoid. Emits a (N, 1, h, w) score map; its mean is the critic
/// value.
class DiscriminatorNetImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorNetImpl(const DiscriminatorOptions& opts);

  /// Throws ShapeError unless the input is (N, 3, resolution, resolution).
  torch::Tensor forward(const torch::Tensor& img);

  /// Mean of the score map per sample, shape (N).
  torch::Tensor critic(const torch::Tensor& img);

  const DiscriminatorOptions& options() const { return opts_; }

 private:
  DiscriminatorOptions opts_;
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(DiscriminatorNet);

/// eps * real + (1 - eps) * fake with one eps per batch element, eps shaped (N).
torch::Tensor interpolate_samples(const torch::Tensor& real, const torch::Tensor& fake,
                                  const torch::Tensor& eps);

}  // namespace s2r::translator
