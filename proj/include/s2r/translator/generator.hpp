#pragma once

#include <torch/torch.h>

#include <vector>

#include "s2r/core/config.hpp"

namespace s2r::translator {

/// Random vector z ~ N(0, I) per batch element, shape (N, d).
struct LatentCode {
  torch::Tensor z;

  static LatentCode sample(int64_t batch, int dim, torch::Generator gen,
                           const torch::TensorOptions& opts = torch::kFloat32);
  static LatentCode zeros(int64_t batch, int dim,
                          const torch::TensorOptions& opts = torch::kFloat32);
};

struct GeneratorOptions {
  int scales_k = 3;
  int base_channels = 16;
  int latent_dim = 8;
  int res_blocks = 1;
  bool noise_map = false;
  /// Std of the output-head init. Small but nonzero: G starts near identity
  /// while every branch still receives gradient on the first step.
  double head_init_std = 1e-3;

  static GeneratorOptions from(const RunConfig& cfg);
};

class ResBlockImpl : public torch::nn::Module {
 public:
  explicit ResBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
};
TORCH_MODULE(ResBlock);

/// Shallow convolutional module: lifts a downsampled input to the width of
/// its encoder level.
class ShallowConvImpl : public torch::nn::Module {
 public:
  ShallowConvImpl(int in_channels, int out_channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, fuse_{nullptr};
};
TORCH_MODULE(ShallowConv);

/// Feature attention: the shallow features gate the strided encoder features
/// (elementwise product), then a convolution fuses the result back in.
class FeatureAttentionImpl : public torch::nn::Module {
 public:
  explicit FeatureAttentionImpl(int channels);
  torch::Tensor forward(const torch::Tensor& encoder, const torch::Tensor& shallow);

 private:
  torch::nn::Conv2d merge_{nullptr};
};
TORCH_MODULE(FeatureAttention);

/// Asymmetric feature fusion: every encoder level resampled to one size,
/// concatenated and fused.
class FeatureFusionImpl : public torch::nn::Module {
 public:
  FeatureFusionImpl(int in_channels, int out_channels);
  torch::Tensor forward(const std::vector<torch::Tensor>& features, int64_t height, int64_t width);

 private:
  torch::nn::Conv2d squeeze_{nullptr}, conv_{nullptr};
};
TORCH_MODULE(FeatureFusion);

/// Multi-input multi-output U-Net. Input y^c is pyramided into scales_k
/// levels (same bilinear operator as core::resize); the latent code is
/// broadcast and concatenated at every level's input. Each decoder level owns
/// a head predicting a multiplicative map k and an additive map n, and emits
/// clamp(k * y_level + n, -1, 1).
class GeneratorNetImpl : public torch::nn::Module {
 public:
  explicit GeneratorNetImpl(const GeneratorOptions& opts);

  /// Outputs coarse to fine; output i has size input / 2^(k-1-i). Throws
  /// ShapeError when the input size is not a multiple of 2^(k-1).
  /// `noise_gen` feeds the optional per-pixel noise map.
  std::vector<torch::Tensor> forward(const torch::Tensor& y_c, const torch::Tensor& z,
                                     torch::optional<torch::Generator> noise_gen = torch::nullopt);

  /// Finest output only.
  torch::Tensor translate(const torch::Tensor& y_c, const torch::Tensor& z,
                          torch::optional<torch::Generator> noise_gen = torch::nullopt);

  /// Input pyramid, coarse to fine, matching the forward outputs.
  std::vector<torch::Tensor> pyramid(const torch::Tensor& y_c) const;

  const GeneratorOptions& options() const { return opts_; }

  /// Named groups of submodules (scm, eb/fam, aff, db, heads, ...), used to
  /// audit per-branch gradient flow.
  std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>> branches() const;

 private:
  int input_channels() const;

  GeneratorOptions opts_;
  torch::nn::Conv2d stem_{nullptr};
  torch::nn::ModuleList encoders_{nullptr};      // EB per level
  torch::nn::ModuleList downs_{nullptr};         // strided conv into level l >= 1
  torch::nn::ModuleList shallow_{nullptr};       // SCM per level >= 1
  torch::nn::ModuleList attention_{nullptr};     // FAM per level >= 1
  torch::nn::ModuleList fusion_{nullptr};        // AFF per level < k-1
  torch::nn::ModuleList ups_{nullptr};           // transposed conv from level l+1 to l
  torch::nn::ModuleList merges_{nullptr};        // 1x1 conv after skip concat
  torch::nn::ModuleList decoders_{nullptr};      // DB per level
  torch::nn::ModuleList heads_{nullptr};         // output head per level
};
TORCH_MODULE(GeneratorNet);

}  // namespace s2r::translator
