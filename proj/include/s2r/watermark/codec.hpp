#pragma once

#include <torch/torch.h>

#include <vector>

#include "s2r/core/config.hpp"
#include "s2r/core/image.hpp"
#include "s2r/core/message.hpp"

namespace s2r::watermark {

struct CodecOptions {
  int message_length = 64;
  int channels = 32;
  int blocks = 4;
  /// Native (square) resolution the codec is trained at.
  int resolution = 128;
  /// Message embedding: replicated (false) or dense coarse map (true).
  bool dense = false;
  /// Scales the residual before it is added to the cover.
  double residual_scale = 1.0;

  static CodecOptions from(const RunConfig& cfg);
};

/// Residual embedder: the message (as +-1) is either replicated over the image
/// plane or, in the dense layout, projected into a coarse (resolution / 8)
/// map and upsampled. It is concatenated to cover features, passed through
/// residual conv blocks, and a zero-initialized head predicts the residual.
class EncoderNetImpl : public torch::nn::Module {
 public:
  explicit EncoderNetImpl(const CodecOptions& opts);

  /// clamp(cover + residual, -1, 1). cover (N, 3, H, W); bits (N, L) of 0/1.
  torch::Tensor forward(const torch::Tensor& cover, const torch::Tensor& bits);
  torch::Tensor residual(const torch::Tensor& cover, const torch::Tensor& bits);

  const CodecOptions& options() const { return opts_; }

 private:
  CodecOptions opts_;
  torch::nn::Conv2d features_{nullptr}, join_{nullptr}, head_{nullptr};
  torch::nn::Linear message_{nullptr};
  torch::nn::Sequential blocks_{nullptr};
};
TORCH_MODULE(EncoderNet);

/// Three stride-2 convs down to resolution / 8, then a per-bit linear head
/// over the global average (replicate layout) or the flattened map (dense).
class DecoderNetImpl : public torch::nn::Module {
 public:
  explicit DecoderNetImpl(const CodecOptions& opts);

  /// Raw per-bit logits (N, L).
  torch::Tensor forward(const torch::Tensor& img);

  const CodecOptions& options() const { return opts_; }

 private:
  CodecOptions opts_;
  torch::nn::Sequential body_{nullptr};
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(DecoderNet);

/// Watermark a single image at the codec's native resolution. Throws
/// ShapeError on any other size: arbitrary sizes go through
/// resolution_scale_embed.
Image encode(const Image& cover, const WatermarkMessage& msg, EncoderNet& net);

struct Decoded {
  std::vector<float> scores;   // sigmoid(logit) per bit
  WatermarkMessage message;    // bit = 1 iff score > 0.5; 0.5 itself decodes to 0
};

Decoded decode(const Image& img, DecoderNet& net);

/// Hard bits from soft scores in [0, 1] with the tie rule above. Works on
/// (L) or (N, L) tensors.
torch::Tensor hard_bits(const torch::Tensor& scores);
WatermarkMessage to_message(const std::vector<float>& scores);

/// Watermark an arbitrary-resolution 8-bit image: normalize, resize to the
/// native size, take the encoder residual there, resize the residual back,
/// add, clamp and denormalize. `image_u8` is (H, W, 3) uint8.
torch::Tensor resolution_scale_embed(const torch::Tensor& image_u8, const WatermarkMessage& msg,
                                     EncoderNet& enc);

/// The high-resolution residual r of the procedure above, before the final
/// clamp. `image` is a normalized (3, H, W) tensor.
torch::Tensor upscaled_residual(const torch::Tensor& image, const WatermarkMessage& msg,
                                EncoderNet& enc);

}  // namespace s2r::watermark
