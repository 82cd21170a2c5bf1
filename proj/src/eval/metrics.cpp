#include "s2r/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "s2r/core/error.hpp"

namespace s2r::eval {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> w{};
  double sum = 0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

/// 'valid' separable filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::array<double, kWindow>& g) {
  const int ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * src[y * w + x + k];
      tmp[y * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * tmp[(y + k) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

std::vector<double> plane(const torch::Tensor& intensity, int64_t c) {
  auto p = intensity.select(0, c).contiguous();
  return {p.data_ptr<double>(), p.data_ptr<double>() + p.numel()};
}

}  // namespace

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
  if (!a.sizes().equals(b.sizes())) throw ShapeError("psnr: image shapes differ");
  const double mse = (to_intensity(a) - to_intensity(b)).pow(2).mean().item<double>();
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double psnr(const Image& a, const Image& b) { return psnr(a.tensor(), b.tensor()); }

double ssim(const torch::Tensor& a, const torch::Tensor& b) {
  if (!a.sizes().equals(b.sizes())) throw ShapeError("ssim: image shapes differ");
  if (a.dim() != 3) throw ShapeError("ssim expects (C, H, W) images");
  const int h = static_cast<int>(a.size(1)), w = static_cast<int>(a.size(2));
  if (h < kWindow || w < kWindow) {
    throw ShapeError("ssim needs images of at least 11x11, got " + std::to_string(h) + "x" +
                     std::to_string(w));
  }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  const auto g = gaussian_window();
  auto ia = to_intensity(a.detach()).contiguous();
  auto ib = to_intensity(b.detach()).contiguous();
  double total = 0;
  for (int64_t c = 0; c < a.size(0); ++c) {
    auto x = plane(ia, c), y = plane(ib, c);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    auto mx = filter_valid(x, h, w, g), my = filter_valid(y, h, w, g);
    auto sxx = filter_valid(xx, h, w, g), syy = filter_valid(yy, h, w, g);
    auto sxy = filter_valid(xy, h, w, g);
    double sum = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(a.size(0));
}

double ssim(const Image& a, const Image& b) { return ssim(a.tensor(), b.tensor()); }

std::array<double, 256> HistogramCurves::mean_curve() const {
  std::array<double, 256> out{};
  for (const auto& ch : channels) {
    for (int i = 0; i < 256; ++i) out[i] += ch[i] / static_cast<double>(channels.size());
  }
  return out;
}

HistogramCurves set_histogram(const std::vector<Image>& images) {
  if (images.empty()) throw ConfigError("histogram of an empty image set");
  const auto channels = images.front().channels();
  HistogramCurves curves;
  curves.channels.assign(channels, std::array<double, 256>{});
  for (const auto& im : images) {
    if (im.channels() != channels) throw ShapeError("histogram set mixes channel counts");
    auto u8 = denormalize(im.tensor()).contiguous();
    const auto* p = u8.data_ptr<std::uint8_t>();
    const int64_t per_channel = im.height() * im.width();
    for (int64_t c = 0; c < channels; ++c) {
      std::array<double, 256> counts{};
      for (int64_t i = 0; i < per_channel; ++i) counts[p[c * per_channel + i]] += 1.0;
      for (int b = 0; b < 256; ++b) {
        curves.channels[c][b] += counts[b] / static_cast<double>(per_channel) /
                                 static_cast<double>(images.size());
      }
    }
  }
  return curves;
}

HistogramComparison hist_compare(const std::vector<Image>& set_a, const std::vector<Image>& set_b) {
  if (set_a.empty() || set_b.empty()) throw ConfigError("hist_compare needs non-empty sets");
  HistogramComparison cmp;
  cmp.a = set_histogram(set_a);
  cmp.b = set_histogram(set_b);
  if (cmp.a.channels.size() != cmp.b.channels.size()) {
    throw ShapeError("hist_compare: sets differ in channel count");
  }
  double sum = 0;
  for (std::size_t c = 0; c < cmp.a.channels.size(); ++c) {
    for (int i = 0; i < 256; ++i) sum += std::abs(cmp.a.channels[c][i] - cmp.b.channels[c][i]);
  }
  cmp.distance = sum / (256.0 * static_cast<double>(cmp.a.channels.size()));
  return cmp;
}

void write_histogram_csv(std::ostream& out, const HistogramComparison& cmp) {
  const auto a = cmp.a.mean_curve();
  const auto b = cmp.b.mean_curve();
  out << "bin,freq_a,freq_b\n";
  char buf[96];
  for (int i = 0; i < 256; ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", i, a[i], b[i]);
    out << buf;
  }
}

}  // namespace s2r::eval
