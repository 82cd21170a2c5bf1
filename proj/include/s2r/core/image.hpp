#pragma once

#include <torch/torch.h>

#include <cstdint>

namespace s2r {

/// A single image in normalized range [-1, 1], stored channel-first (C, H, W)
/// as float32. Batches are plain (N, C, H, W) tensors.
class Image {
 public:
  static constexpr int64_t kMinSide = 8;

  Image() = default;

  /// Takes ownership of a (C, H, W) float tensor. Throws ShapeError on a bad
  /// layout and ContractError when values leave [-1, 1].
  explicit Image(torch::Tensor chw);

  const torch::Tensor& tensor() const noexcept { return data_; }
  int64_t channels() const { return data_.size(0); }
  int64_t height() const { return data_.size(1); }
  int64_t width() const { return data_.size(2); }

  /// (1, C, H, W) view for feeding batch APIs.
  torch::Tensor batch() const { return data_.unsqueeze(0); }

 private:
  torch::Tensor data_;
};

/// x / 127.5 - 1 on 0..255 values (any dtype), returned as float32.
torch::Tensor normalize(const torch::Tensor& u8);

/// round(x * 127.5 + 127.5) clamped to [0, 255], returned as uint8.
torch::Tensor denormalize(const torch::Tensor& x);

/// x * 127.5 + 127.5 without rounding, as float64. Metrics use this scale.
torch::Tensor to_intensity(const torch::Tensor& x);

float normalize_value(double level);
std::uint8_t denormalize_value(double x);

/// Bilinear resize (half-pixel centres, no antialiasing). Accepts (C, H, W)
/// or (N, C, H, W); identity when the size already matches.
torch::Tensor resize(const torch::Tensor& x, int64_t height, int64_t width);

/// Largest centred square crop of a (C, H, W) or (N, C, H, W) tensor.
torch::Tensor center_crop_square(const torch::Tensor& x);

}  // namespace s2r
