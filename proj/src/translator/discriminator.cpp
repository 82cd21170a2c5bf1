#include "s2r/translator/discriminator.hpp"

#include "s2r/core/error.hpp"

namespace s2r::translator {

namespace nn = torch::nn;

DiscriminatorOptions DiscriminatorOptions::from(const RunConfig& cfg) {
  return {cfg.discriminator.base_channels, cfg.train_resolution};
}

DiscriminatorNetImpl::DiscriminatorNetImpl(const DiscriminatorOptions& opts) : opts_(opts) {
  const int c = opts.base_channels;
  auto lrelu = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); };
  body_ = register_module(
      "body",
      nn::Sequential(nn::Conv2d(nn::Conv2dOptions(3, c, 4).stride(2).padding(1)), lrelu(),
                     nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 4).stride(2).padding(1)), lrelu(),
                     nn::Conv2d(nn::Conv2dOptions(2 * c, 4 * c, 4).stride(1).padding(1)), lrelu(),
                     nn::Conv2d(nn::Conv2dOptions(4 * c, 1, 4).stride(1).padding(1))));
}

torch::Tensor DiscriminatorNetImpl::forward(const torch::Tensor& img) {
  if (img.dim() != 4 || img.size(1) != 3 || img.size(2) != opts_.resolution ||
      img.size(3) != opts_.resolution) {
    throw ShapeError("discriminator expects (N, 3, " + std::to_string(opts_.resolution) + ", " +
                     std::to_string(opts_.resolution) + ") input");
  }
  return body_->forward(img);
}

torch::Tensor DiscriminatorNetImpl::critic(const torch::Tensor& img) {
  return forward(img).mean({1, 2, 3});
}

torch::Tensor interpolate_samples(const torch::Tensor& real, const torch::Tensor& fake,
                                  const torch::Tensor& eps) {
  if (!real.sizes().equals(fake.sizes())) {
    throw ShapeError("interpolate_samples: real and fake shapes differ");
  }
  if (eps.numel() != real.size(0)) throw ShapeError("interpolate_samples: one eps per sample");
  auto e = eps.to(real.options()).view({-1, 1, 1, 1});
  return e * real + (1.0 - e) * fake;
}

}  // namespace s2r::translator
