#include "s2r/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "s2r/core/error.hpp"

namespace s2r {

Image::Image(torch::Tensor chw) {
  if (chw.dim() != 3) {
    throw ShapeError("image tensor must be (C, H, W), got " + std::to_string(chw.dim()) + " dims");
  }
  if (chw.size(0) != 1 && chw.size(0) != 3) {
    throw ShapeError("image must have 1 or 3 channels, got " + std::to_string(chw.size(0)));
  }
  if (chw.size(1) < kMinSide || chw.size(2) < kMinSide) {
    std::ostringstream os;
    os << "image must be at least " << kMinSide << "x" << kMinSide << ", got " << chw.size(1) << "x"
       << chw.size(2);
    throw ShapeError(os.str());
  }
  data_ = chw.to(torch::kFloat32).contiguous();
  if (data_.numel() > 0) {
    auto lo = data_.min().item<float>();
    auto hi = data_.max().item<float>();
    if (lo < -1.0f || hi > 1.0f || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw ContractError("image values must lie in [-1, 1]");
    }
  }
}

torch::Tensor normalize(const torch::Tensor& u8) {
  return u8.to(torch::kFloat32) / 127.5f - 1.0f;
}

torch::Tensor denormalize(const torch::Tensor& x) {
  return torch::round(x.to(torch::kFloat32) * 127.5f + 127.5f).clamp(0, 255).to(torch::kUInt8);
}

torch::Tensor to_intensity(const torch::Tensor& x) {
  return x.to(torch::kFloat64) * 127.5 + 127.5;
}

float normalize_value(double level) { return static_cast<float>(level / 127.5 - 1.0); }

std::uint8_t denormalize_value(double x) {
  return static_cast<std::uint8_t>(std::clamp(std::round(x * 127.5 + 127.5), 0.0, 255.0));
}

torch::Tensor resize(const torch::Tensor& x, int64_t height, int64_t width) {
  const bool single = x.dim() == 3;
  auto batch = single ? x.unsqueeze(0) : x;
  if (batch.dim() != 4) throw ShapeError("resize expects (C, H, W) or (N, C, H, W)");
  if (batch.size(2) == height && batch.size(3) == width) return x;
  namespace F = torch::nn::functional;
  auto out = F::interpolate(batch, F::InterpolateFuncOptions()
                                       .size(std::vector<int64_t>{height, width})
                                       .mode(torch::kBilinear)
                                       .align_corners(false));
  return single ? out.squeeze(0) : out;
}

torch::Tensor center_crop_square(const torch::Tensor& x) {
  const int64_t h = x.size(-2);
  const int64_t w = x.size(-1);
  const int64_t side = std::min(h, w);
  return x.narrow(-2, (h - side) / 2, side).narrow(-1, (w - side) / 2, side);
}

}  // namespace s2r
