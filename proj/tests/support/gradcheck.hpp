#pragma once

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include <algorithm>
#include <functional>

namespace s2r::testing {

/// Relative error between the analytic gradient of sum(w * f(x)) and its
/// central finite-difference estimate, with w a fixed random weighting.
/// Everything runs in float64.
inline double gradient_error(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                             const torch::Tensor& x0, double h = 1e-6, std::uint64_t seed = 17) {
  auto x = x0.to(torch::kFloat64).detach().clone().requires_grad_(true);
  auto y = f(x);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto w = torch::randn(y.sizes(), gen, torch::kFloat64);
  auto analytic = torch::autograd::grad({(w * y).sum()}, {x})[0].detach();

  // Grad mode stays on: some functions (the gradient penalty) differentiate
  // internally.
  auto base = x.detach().clone();
  auto flat = base.view({-1});
  auto numeric = torch::zeros_like(base);
  auto nflat = numeric.view({-1});
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double v = flat[i].item<double>();
    flat[i] = v + h;
    const double up = (w * f(base)).sum().detach().item<double>();
    flat[i] = v - h;
    const double down = (w * f(base)).sum().detach().item<double>();
    flat[i] = v;
    nflat[i] = (up - down) / (2 * h);
  }
  const double scale = std::max({numeric.norm().item<double>(), analytic.norm().item<double>(), 1e-12});
  return (analytic - numeric).norm().item<double>() / scale;
}

}  // namespace s2r::testing
