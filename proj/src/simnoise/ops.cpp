#include "s2r/simnoise/ops.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "s2r/core/error.hpp"

namespace s2r::simnoise {
namespace {

constexpr double kPi = std::numbers::pi;

void check_batch(const torch::Tensor& x, const char* op) {
  if (x.dim() != 4) {
    throw ShapeError(std::string(op) + " expects an (N, C, H, W) batch");
  }
}

/// Broadcast a per-sample parameter tensor to (N, 1, 1, 1) in x's dtype.
torch::Tensor sample_param(const torch::Tensor& p, const torch::Tensor& x, const char* name) {
  auto q = p.to(x.options()).reshape({-1});
  if (q.size(0) == 1) q = q.expand({x.size(0)});
  if (q.size(0) != x.size(0)) {
    throw ShapeError(std::string(name) + " needs one value per sample");
  }
  return q.view({-1, 1, 1, 1});
}

/// Normalized pixel-centre coordinates u, v in (0, 1), shaped (1, 1, H, W).
std::pair<torch::Tensor, torch::Tensor> pixel_coords(const torch::Tensor& x) {
  const auto h = x.size(2), w = x.size(3);
  auto opts = x.options().requires_grad(false);
  auto u = (torch::arange(w, opts) + 0.5) / static_cast<double>(w);
  auto v = (torch::arange(h, opts) + 0.5) / static_cast<double>(h);
  return {u.view({1, 1, 1, w}).expand({1, 1, h, w}), v.view({1, 1, h, 1}).expand({1, 1, h, w})};
}

torch::Tensor clamp_unit(const torch::Tensor& x) { return x.clamp(-1.0, 1.0); }

const char* corner_name(int i) {
  static const char* kNames[] = {"top-left", "top-right", "bottom-right", "bottom-left"};
  return kNames[i];
}

// Standard JPEG quantization tables (Annex K).
constexpr double kLumaQ[64] = {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,
                               58, 60, 55, 14, 13,  16,  24,  40,  57, 69, 56, 14, 17,
                               22, 29, 51, 87, 80,  62,  18,  22,  37, 56, 68, 109, 103,
                               77, 24, 35, 55, 64,  81,  104, 113, 92, 49, 64, 78, 87,
                               103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr double kChromaQ[64] = {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                                 24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                                 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                                 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

torch::Tensor dct_matrix(const torch::TensorOptions& opts) {
  auto d = torch::empty({8, 8}, torch::kFloat64);
  auto a = d.accessor<double, 2>();
  for (int k = 0; k < 8; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
    for (int n = 0; n < 8; ++n) a[k][n] = scale * std::cos(kPi * (2 * n + 1) * k / 16.0);
  }
  return d.to(opts);
}

torch::Tensor ycbcr_matrix(const torch::TensorOptions& opts) {
  auto m = torch::tensor({0.299, 0.587, 0.114, -0.168736, -0.331264, 0.5, 0.5, -0.418688, -0.081312},
                         torch::kFloat64);
  return m.view({3, 3}).to(opts.requires_grad(false));
}

}  // namespace

std::array<double, 2> Homography::apply(double x, double y) const {
  const double w = m[6] * x + m[7] * y + m[8];
  return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

Homography Homography::inverse() const {
  const auto& a = m;
  const double c00 = a[4] * a[8] - a[5] * a[7];
  const double c01 = a[5] * a[6] - a[3] * a[8];
  const double c02 = a[3] * a[7] - a[4] * a[6];
  const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
  if (std::abs(det) < 1e-12) throw DegenerateError("homography is not invertible");
  Homography r;
  r.m = {c00 / det,
         (a[2] * a[7] - a[1] * a[8]) / det,
         (a[1] * a[5] - a[2] * a[4]) / det,
         c01 / det,
         (a[0] * a[8] - a[2] * a[6]) / det,
         (a[2] * a[3] - a[0] * a[5]) / det,
         c02 / det,
         (a[1] * a[6] - a[0] * a[7]) / det,
         (a[0] * a[4] - a[1] * a[3]) / det};
  return r;
}

Homography Homography::operator*(const Homography& rhs) const {
  Homography r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * rhs.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  }
  return r;
}

Homography fit_homography(const Quad& src, const Quad& dst) {
  for (const Quad* q : {&src, &dst}) {
    for (int i = 0; i < 4; ++i) {
      const auto& p = (*q)[(i + 3) % 4];
      const auto& c = (*q)[i];
      const auto& n = (*q)[(i + 1) % 4];
      const double area = (c[0] - p[0]) * (n[1] - p[1]) - (c[1] - p[1]) * (n[0] - p[0]);
      if (std::abs(area) < 1e-9) {
        std::ostringstream os;
        os << "degenerate corner set: " << corner_name(i) << " corner (" << c[0] << ", " << c[1]
           << ") is collinear with its neighbours";
        throw DegenerateError(os.str());
      }
    }
  }
  auto a = torch::zeros({8, 8}, torch::kFloat64);
  auto b = torch::zeros({8}, torch::kFloat64);
  auto A = a.accessor<double, 2>();
  auto B = b.accessor<double, 1>();
  for (int i = 0; i < 4; ++i) {
    const double x = src[i][0], y = src[i][1], u = dst[i][0], v = dst[i][1];
    const int r = 2 * i;
    A[r][0] = x, A[r][1] = y, A[r][2] = 1, A[r][6] = -u * x, A[r][7] = -u * y, B[r] = u;
    A[r + 1][3] = x, A[r + 1][4] = y, A[r + 1][5] = 1, A[r + 1][6] = -v * x, A[r + 1][7] = -v * y,
           B[r + 1] = v;
  }
  if (std::abs(torch::linalg_det(a).item<double>()) < 1e-12) {
    throw DegenerateError("degenerate corner set: homography system is singular");
  }
  auto h = torch::linalg_solve(a, b);
  Homography H;
  for (int i = 0; i < 8; ++i) H.m[i] = h[i].item<double>();
  H.m[8] = 1.0;
  return H;
}

Homography corner_homography(const Quad& offsets) {
  Quad dst = kUnitSquare;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 2; ++k) {
      if (std::abs(offsets[i][k]) > 0.25) {
        throw ConfigError(std::string("perspective offset exceeds 0.25 at ") + corner_name(i));
      }
      dst[i][k] += offsets[i][k];
    }
  }
  return fit_homography(kUnitSquare, dst);
}

torch::Tensor warp_homography(const torch::Tensor& x, const std::vector<Homography>& hs) {
  check_batch(x, "warp_homography");
  const auto n = x.size(0), h = x.size(2), w = x.size(3);
  if (hs.size() != 1 && static_cast<int64_t>(hs.size()) != n) {
    throw ShapeError("warp_homography needs one homography per sample");
  }
  auto grid = torch::empty({n, h, w, 2}, torch::kFloat64);
  auto g = grid.accessor<double, 4>();
  for (int64_t s = 0; s < n; ++s) {
    const auto inv = hs[hs.size() == 1 ? 0 : s].inverse();
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t xx = 0; xx < w; ++xx) {
        auto p = inv.apply((xx + 0.5) / w, (y + 0.5) / h);
        g[s][y][xx][0] = 2 * p[0] - 1;
        g[s][y][xx][1] = 2 * p[1] - 1;
      }
    }
  }
  namespace F = torch::nn::functional;
  auto out = F::grid_sample(x, grid.to(x.options().requires_grad(false)),
                            F::GridSampleFuncOptions()
                                .mode(torch::kBilinear)
                                .padding_mode(torch::kBorder)
                                .align_corners(false));
  return clamp_unit(out);
}

torch::Tensor perspective_warp(const torch::Tensor& x, const torch::Tensor& corner_offsets) {
  check_batch(x, "perspective_warp");
  auto off = corner_offsets.detach().to(torch::kFloat64).contiguous();
  if (off.dim() == 2) off = off.unsqueeze(0);
  if (off.dim() != 3 || off.size(1) != 4 || off.size(2) != 2) {
    throw ShapeError("corner offsets must be (4, 2) or (N, 4, 2)");
  }
  std::vector<Homography> hs;
  auto a = off.accessor<double, 3>();
  for (int64_t s = 0; s < off.size(0); ++s) {
    Quad q;
    for (int i = 0; i < 4; ++i) q[i] = {a[s][i][0], a[s][i][1]};
    hs.push_back(corner_homography(q));
  }
  return warp_homography(x, hs);
}

torch::Tensor illumination(const torch::Tensor& x, const torch::Tensor& angle,
                           const torch::Tensor& strength) {
  check_batch(x, "illumination");
  auto [u, v] = pixel_coords(x);
  auto th = sample_param(angle, x, "angle");
  auto s = sample_param(strength, x, "strength");
  // Projection onto the ramp direction, scaled so the square maps into [-1, 1].
  auto g = (torch::cos(th) * (u - 0.5) + torch::sin(th) * (v - 0.5)) * std::numbers::sqrt2;
  auto intensity = (x + 1.0) * 0.5;
  return clamp_unit(intensity * (1.0 + s * g) * 2.0 - 1.0);
}

torch::Tensor moire(const torch::Tensor& x, const torch::Tensor& freq, const torch::Tensor& angle,
                    const torch::Tensor& amplitude, const torch::Tensor& phase) {
  check_batch(x, "moire");
  auto [u, v] = pixel_coords(x);
  auto f = sample_param(freq, x, "freq");
  auto th = sample_param(angle, x, "angle");
  auto a = sample_param(amplitude, x, "amplitude");
  auto ph = sample_param(phase, x, "phase");
  auto r = torch::cos(th) * u + torch::sin(th) * v;
  auto pattern = torch::cos(2 * kPi * f * r + ph) * torch::cos(2 * kPi * (f + 1.0) * r);
  return clamp_unit(x + a * pattern);
}

torch::Tensor moire(const torch::Tensor& x, double freq, double angle, double amplitude,
                    double phase) {
  return moire(x, per_sample(x, freq), per_sample(x, angle), per_sample(x, amplitude),
               per_sample(x, phase));
}

torch::Tensor gaussian_noise(const torch::Tensor& x, const torch::Tensor& sigma,
                             torch::Generator gen) {
  check_batch(x, "gaussian_noise");
  auto s = sample_param(sigma, x, "sigma");
  auto eps = torch::randn(x.sizes(), gen, x.options().requires_grad(false));
  return clamp_unit(x + s * eps);
}

torch::Tensor gaussian_noise(const torch::Tensor& x, double sigma, torch::Generator gen) {
  return gaussian_noise(x, per_sample(x, sigma), std::move(gen));
}

torch::Tensor grayscale_deviation(const torch::Tensor& x, const torch::Tensor& delta) {
  check_batch(x, "grayscale_deviation");
  auto d = sample_param(delta, x, "delta");
  return clamp_unit(x + d * (1.0 - x * x));
}

torch::Tensor blur(const torch::Tensor& x, const torch::Tensor& sigma) {
  check_batch(x, "blur");
  auto sig = sigma.detach().to(torch::kFloat64).reshape({-1});
  if (sig.size(0) == 1) sig = sig.expand({x.size(0)});
  if (sig.size(0) != x.size(0)) throw ShapeError("sigma needs one value per sample");
  const auto c = x.size(1);
  namespace F = torch::nn::functional;
  std::vector<torch::Tensor> outs;
  outs.reserve(x.size(0));
  for (int64_t s = 0; s < x.size(0); ++s) {
    auto xs = x.narrow(0, s, 1);
    const double sg = sig[s].item<double>();
    if (sg <= 0.0) {
      outs.push_back(xs);
      continue;
    }
    const int radius = std::max(1, static_cast<int>(std::ceil(3 * sg)));
    auto k = torch::arange(-radius, radius + 1, torch::kFloat64);
    k = torch::exp(-(k * k) / (2 * sg * sg));
    k = (k / k.sum()).to(x.options().requires_grad(false));
    auto kh = k.view({1, 1, 1, -1}).repeat({c, 1, 1, 1});
    auto kv = k.view({1, 1, -1, 1}).repeat({c, 1, 1, 1});
    auto conv = [&](const torch::Tensor& t) {
      auto y = F::conv2d(t, kh, F::Conv2dFuncOptions().padding({0, radius}).groups(c));
      return F::conv2d(y, kv, F::Conv2dFuncOptions().padding({radius, 0}).groups(c));
    };
    auto mass = conv(torch::ones_like(xs).requires_grad_(false));
    outs.push_back(conv(xs) / mass);
  }
  return clamp_unit(torch::cat(outs, 0));
}

torch::Tensor blur(const torch::Tensor& x, double sigma) { return blur(x, per_sample(x, sigma)); }

torch::Tensor color_shift(const torch::Tensor& x, const torch::Tensor& gain,
                          const torch::Tensor& bias) {
  check_batch(x, "color_shift");
  auto shape = [&](const torch::Tensor& p, const char* name) {
    auto q = p.to(x.options());
    if (q.dim() == 1) q = q.unsqueeze(0).expand({x.size(0), q.size(0)});
    if (q.dim() != 2 || q.size(0) != x.size(0) || q.size(1) != x.size(1)) {
      throw ShapeError(std::string(name) + " must be (C) or (N, C)");
    }
    return q.reshape({x.size(0), x.size(1), 1, 1});
  };
  return clamp_unit(shape(gain, "gain") * x + shape(bias, "bias"));
}

torch::Tensor jpeg_approx(const torch::Tensor& x, const torch::Tensor& quality) {
  check_batch(x, "jpeg_approx");
  auto q = quality.detach().to(torch::kFloat64).reshape({-1});
  if (q.size(0) == 1) q = q.expand({x.size(0)});
  if (q.size(0) != x.size(0)) throw ShapeError("quality needs one value per sample");
  const auto n = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);

  // libjpeg quality scaling, as a fraction: 1 at q=50, 0 at q=100.
  auto scale = torch::where(q < 50, 50.0 / q.clamp_min(1.0), 2.0 - q / 50.0).clamp_min(0.0);
  auto luma = torch::from_blob(const_cast<double*>(kLumaQ), {8, 8}, torch::kFloat64);
  auto chroma = torch::from_blob(const_cast<double*>(kChromaQ), {8, 8}, torch::kFloat64);
  auto table = c == 3 ? torch::stack({luma, chroma, chroma}) : luma.unsqueeze(0);
  auto sq = scale.view({n, 1, 1, 1}) * table.unsqueeze(0) / 100.0;
  auto mask = (1.0 / (1.0 + sq * sq)).to(x.options().requires_grad(false));  // (N, C, 8, 8)

  auto y = c == 3 ? torch::einsum("ij,njhw->nihw", {ycbcr_matrix(x.options()), x}) : x;
  const int64_t ph = (8 - h % 8) % 8, pw = (8 - w % 8) % 8;
  if (ph || pw) {
    namespace F = torch::nn::functional;
    y = F::pad(y, F::PadFuncOptions({0, pw, 0, ph}).mode(torch::kReplicate));
  }
  const int64_t H = h + ph, W = w + pw;
  auto d = dct_matrix(x.options().requires_grad(false));
  auto blocks = y.reshape({n, c, H / 8, 8, W / 8, 8}).permute({0, 1, 2, 4, 3, 5});
  auto coef = torch::matmul(torch::matmul(d, blocks), d.t());
  coef = coef * mask.view({n, c, 1, 1, 8, 8});
  auto rec = torch::matmul(torch::matmul(d.t(), coef), d);
  y = rec.permute({0, 1, 2, 4, 3, 5}).reshape({n, c, H, W});
  if (ph || pw) y = y.narrow(2, 0, h).narrow(3, 0, w);
  if (c == 3) {
    y = torch::einsum("ij,njhw->nihw", {torch::linalg_inv(ycbcr_matrix(torch::kFloat64)).to(
                                            x.options().requires_grad(false)),
                                        y});
  }
  return clamp_unit(y);
}

torch::Tensor jpeg_approx(const torch::Tensor& x, double quality) {
  return jpeg_approx(x, per_sample(x, quality));
}

torch::Tensor per_sample(const torch::Tensor& x, double value) {
  return torch::full({x.size(0)}, value, x.options().requires_grad(false));
}

}  // namespace s2r::simnoise
