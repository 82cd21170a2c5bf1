#pragma once

#include <torch/torch.h>

#include <functional>
#include <vector>

#include "s2r/core/config.hpp"

namespace s2r::losses {

enum class Side { generator, discriminator };

/// The shared minimax objective E[log D(y_u)] + E[log(1 - D(G(y_c)))] with D
/// a sigmoid over raw critic logits, evaluated stably as
/// -mean(softplus(-real)) - mean(softplus(fake)).
torch::Tensor adv_objective(const torch::Tensor& real_scores, const torch::Tensor& fake_scores);

/// What each player minimizes.
///   generator:     mean(softplus(-fake))  (non-saturating form of the objective)
///   discriminator: -adv_objective(real, fake)
/// Both are ln 2 per term when every logit is 0. Throws NumericError on
/// non-finite scores.
torch::Tensor adv_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                       Side side);

using Critic = std::function<torch::Tensor(const torch::Tensor&)>;

/// mean_batch (||grad_y mean D(y)||_2 - 1)^2 over the interpolates. The
/// critic may return a score map or one value per sample; it is averaged per
/// sample. The result keeps its graph so it can be backpropagated into the
/// critic's parameters. Throws ContractError when the critic output carries
/// no gradient path to its input.
torch::Tensor gradient_penalty(const Critic& critic, const torch::Tensor& y_tilde);

/// Frozen feature map phi used by the perceptual loss: three 3x3
/// convolutions with ReLU between them. Weights are drawn once from `seed`,
/// or loaded from an archive when a path is configured.
class PerceptualExtractorImpl : public torch::nn::Module {
 public:
  PerceptualExtractorImpl(int channels, std::uint64_t seed, const std::string& weights_path = "");

  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
};
TORCH_MODULE(PerceptualExtractor);

/// (1 / 2^(k-1)) * sum_i mean |phi(target_i) - phi(output_i)|, scale lists
/// ordered coarse to fine. The per-scale mean realises the 1 / t_i factor.
torch::Tensor perceptual_multiscale(const std::vector<torch::Tensor>& outputs,
                                    const std::vector<torch::Tensor>& targets,
                                    PerceptualExtractor& extractor, int k);

/// adv + lambda_G * perc
torch::Tensor total_G(const torch::Tensor& adv, const torch::Tensor& perc, const LossWeights& w);
double total_G(double adv, double perc, const LossWeights& w);

/// -adv + lambda_grad * gp, with adv the shared objective.
torch::Tensor total_D(const torch::Tensor& adv, const torch::Tensor& gp, const LossWeights& w);
double total_D(double adv, double gp, const LossWeights& w);

/// 0 before `start`, then linear up to 1 over `length` steps.
double ramp(std::int64_t step, std::int64_t start, std::int64_t length);

/// message_weight * BCE(logits, bits) + image_weight * MSE(watermarked, cover)
struct WatermarkLoss {
  torch::Tensor total;
  torch::Tensor message;
  torch::Tensor image;
};
WatermarkLoss watermark_loss(const torch::Tensor& logits, const torch::Tensor& bits,
                             const torch::Tensor& watermarked, const torch::Tensor& cover,
                             const LossWeights& w);

}  // namespace s2r::losses
