#pragma once

#include <torch/torch.h>

#include <array>
#include <vector>

// Differentiable screen-camera distortion primitives. Every op takes an
// (N, C, H, W) batch in [-1, 1] (float or double), preserves its shape and
// clamps the result back into [-1, 1]. Per-sample parameters are (N) or
// (N, k) tensors; scalar overloads broadcast one value over the batch.

namespace s2r::simnoise {

/// Row-major 3x3 projective transform on unit-square coordinates.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  std::array<double, 2> apply(double x, double y) const;
  Homography inverse() const;
  Homography operator*(const Homography& rhs) const;
};

/// Corner order: top-left, top-right, bottom-right, bottom-left.
using Quad = std::array<std::array<double, 2>, 4>;

inline constexpr Quad kUnitSquare{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

/// Fits the homography mapping `src` corners onto `dst` corners. Throws
/// DegenerateError naming the corner that collapsed onto its neighbours'
/// line.
Homography fit_homography(const Quad& src, const Quad& dst);

/// Unit square -> unit square displaced by `offsets` (fractions of the side).
Homography corner_homography(const Quad& offsets);

/// out(q) = in(H^-1 q), edge-replicated outside the frame. One H per sample
/// or a single H for the whole batch.
torch::Tensor warp_homography(const torch::Tensor& x, const std::vector<Homography>& hs);

/// Perspective jitter. `corner_offsets` is (4, 2) or (N, 4, 2); every
/// coordinate must satisfy |offset| <= 0.25.
torch::Tensor perspective_warp(const torch::Tensor& x, const torch::Tensor& corner_offsets);

/// Multiplies intensity by a linear ramp 1 + strength * g, g in [-1, 1]
/// along `angle`.
torch::Tensor illumination(const torch::Tensor& x, const torch::Tensor& angle,
                           const torch::Tensor& strength);

/// Adds amplitude * cos(2 pi f r + phase) * cos(2 pi (f + 1) r), r being the
/// coordinate along `angle`: two gratings one cycle apart, whose beat is the
/// visible moire band.
torch::Tensor moire(const torch::Tensor& x, const torch::Tensor& freq, const torch::Tensor& angle,
                    const torch::Tensor& amplitude, const torch::Tensor& phase);
torch::Tensor moire(const torch::Tensor& x, double freq, double angle, double amplitude,
                    double phase = 0.0);

torch::Tensor gaussian_noise(const torch::Tensor& x, const torch::Tensor& sigma,
                             torch::Generator gen);
torch::Tensor gaussian_noise(const torch::Tensor& x, double sigma, torch::Generator gen);

/// Mid-tone gray-level shift x + delta * (1 - x^2); endpoints stay fixed.
torch::Tensor grayscale_deviation(const torch::Tensor& x, const torch::Tensor& delta);

/// Separable Gaussian blur with normalized boundary handling (the kernel is
/// renormalized over in-frame taps). sigma = 0 is the identity.
torch::Tensor blur(const torch::Tensor& x, const torch::Tensor& sigma);
torch::Tensor blur(const torch::Tensor& x, double sigma);

/// Per-channel affine gain * x + bias. gain, bias: (N, C) or (C).
torch::Tensor color_shift(const torch::Tensor& x, const torch::Tensor& gain,
                          const torch::Tensor& bias);

/// Smooth JPEG surrogate: YCbCr, 8x8 block DCT, each coefficient scaled by
/// 1 / (1 + (s * Q / 100)^2) with Q the standard quantization table and s the
/// libjpeg quality scale. Quality 100 is the identity.
torch::Tensor jpeg_approx(const torch::Tensor& x, const torch::Tensor& quality);
torch::Tensor jpeg_approx(const torch::Tensor& x, double quality);

/// Per-sample scalar parameter tensor of length N.
torch::Tensor per_sample(const torch::Tensor& x, double value);

}  // namespace s2r::simnoise
