#pragma once

#include <torch/torch.h>

#include <array>
#include <vector>

#include "s2r/core/image.hpp"

namespace s2r::eval {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(255^2 / MSE) on the 0..255 scale (x * 127.5 + 127.5, unrounded).
/// Identical inputs return kPsnrCap. Accepts (C, H, W) or (N, C, H, W).
double psnr(const torch::Tensor& a, const torch::Tensor& b);
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), constants
/// (0.01 * 255)^2 and (0.03 * 255)^2, valid-window map averaged, then the
/// channel mean. Inputs are normalized (C, H, W); throws ShapeError when the
/// image is smaller than the window.
double ssim(const torch::Tensor& a, const torch::Tensor& b);
double ssim(const Image& a, const Image& b);

/// 256-bin per-channel histograms of 8-bit intensities, each image's
/// histogram normalized to sum 1 and averaged over its set.
struct HistogramCurves {
  std::vector<std::array<double, 256>> channels;

  /// Channel mean of the curves, for plotting.
  std::array<double, 256> mean_curve() const;
};

HistogramCurves set_histogram(const std::vector<Image>& images);

struct HistogramComparison {
  double distance = 0.0;   // mean over channels and bins of |a - b|
  HistogramCurves a;
  HistogramCurves b;
};

/// Throws ConfigError on an empty set.
HistogramComparison hist_compare(const std::vector<Image>& set_a, const std::vector<Image>& set_b);

/// CSV rows "bin,freq_a,freq_b" with channel-mean curves.
void write_histogram_csv(std::ostream& out, const HistogramComparison& cmp);

}  // namespace s2r::eval
