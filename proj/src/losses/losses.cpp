#include "s2r/losses/losses.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "s2r/core/error.hpp"

namespace s2r::losses {
namespace {

namespace F = torch::nn::functional;

void require_finite(const torch::Tensor& t, const char* what) {
  if (!torch::isfinite(t).all().item<bool>()) {
    throw NumericError(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

torch::Tensor adv_objective(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  require_finite(real_scores, "real scores");
  require_finite(fake_scores, "fake scores");
  return -F::softplus(-real_scores).mean() - F::softplus(fake_scores).mean();
}

torch::Tensor adv_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                       Side side) {
  if (side == Side::generator) {
    require_finite(fake_scores, "fake scores");
    return F::softplus(-fake_scores).mean();
  }
  return -adv_objective(real_scores, fake_scores);
}

torch::Tensor gradient_penalty(const Critic& critic, const torch::Tensor& y_tilde) {
  auto y = y_tilde.detach().requires_grad_(true);
  auto scores = critic(y);
  if (!scores.requires_grad()) {
    throw ContractError("gradient penalty: critic output has no gradient with respect to its input");
  }
  auto per_sample = scores.dim() <= 1 ? scores.reshape({-1}) : scores.flatten(1).mean(1);
  if (per_sample.size(0) != y.size(0)) {
    throw ShapeError("gradient penalty: critic must score every batch element");
  }
  auto grads = torch::autograd::grad({per_sample.sum()}, {y}, {}, /*retain_graph=*/true,
                                     /*create_graph=*/true, /*allow_unused=*/true)[0];
  if (!grads.defined()) {
    throw ContractError("gradient penalty: input gradient unavailable");
  }
  auto norm = torch::sqrt(grads.flatten(1).pow(2).sum(1) + 1e-12);
  return (norm - 1.0).pow(2).mean();
}

PerceptualExtractorImpl::PerceptualExtractorImpl(int channels, std::uint64_t seed,
                                                 const std::string& weights_path) {
  namespace nn = torch::nn;
  conv1_ = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(3, channels, 3).padding(1)));
  conv2_ = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  conv3_ = register_module("conv3", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  if (!weights_path.empty()) {
    torch::serialize::InputArchive archive;
    archive.load_from(weights_path);
    load(archive);
  } else {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    torch::NoGradGuard guard;
    for (auto& p : parameters()) {
      if (p.dim() > 1) {
        const double fan_in = static_cast<double>(p.numel() / p.size(0));
        p.copy_(torch::randn(p.sizes(), gen) * std::sqrt(2.0 / fan_in));
      } else {
        p.zero_();
      }
    }
  }
  for (auto& p : parameters()) p.requires_grad_(false);
  eval();
}

torch::Tensor PerceptualExtractorImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(conv1_(x));
  h = torch::relu(conv2_(h));
  return conv3_(h);
}

torch::Tensor perceptual_multiscale(const std::vector<torch::Tensor>& outputs,
                                    const std::vector<torch::Tensor>& targets,
                                    PerceptualExtractor& extractor, int k) {
  if (static_cast<int>(outputs.size()) != k || static_cast<int>(targets.size()) != k) {
    throw ShapeError("perceptual loss expects " + std::to_string(k) + " scales, got " +
                     std::to_string(outputs.size()) + " outputs and " +
                     std::to_string(targets.size()) + " targets");
  }
  torch::Tensor sum;
  for (int i = 0; i < k; ++i) {
    if (!outputs[i].sizes().equals(targets[i].sizes())) {
      throw ShapeError("perceptual loss: scale " + std::to_string(i) + " shapes differ");
    }
    auto term = (extractor->forward(targets[i]) - extractor->forward(outputs[i])).abs().mean();
    sum = sum.defined() ? sum + term : term;
  }
  return sum / std::ldexp(1.0, k - 1);
}

torch::Tensor total_G(const torch::Tensor& adv, const torch::Tensor& perc, const LossWeights& w) {
  return adv + w.lambda_G * perc;
}

double total_G(double adv, double perc, const LossWeights& w) { return adv + w.lambda_G * perc; }

torch::Tensor total_D(const torch::Tensor& adv, const torch::Tensor& gp, const LossWeights& w) {
  return -adv + w.lambda_grad * gp;
}

double total_D(double adv, double gp, const LossWeights& w) { return -adv + w.lambda_grad * gp; }

double ramp(std::int64_t step, std::int64_t start, std::int64_t length) {
  if (step < start) return 0.0;
  if (length <= 0 || step >= start + length) return 1.0;
  return static_cast<double>(step - start) / static_cast<double>(length);
}

WatermarkLoss watermark_loss(const torch::Tensor& logits, const torch::Tensor& bits,
                             const torch::Tensor& watermarked, const torch::Tensor& cover,
                             const LossWeights& w) {
  WatermarkLoss out;
  out.message = F::binary_cross_entropy_with_logits(logits, bits.to(logits.options()));
  out.image = F::mse_loss(watermarked, cover);
  out.total = w.message_weight * out.message + w.image_weight * out.image;
  return out;
}

}  // namespace s2r::losses
