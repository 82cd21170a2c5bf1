#pragma once

#include <torch/torch.h>

namespace s2r::simnoise {

/// Affine noise operator y = k * x + n. `k` (multiplicative) and `n`
/// (additive) are scalars or per-pixel maps broadcast against the image.
struct NoiseOperatorPair {
  torch::Tensor k;
  torch::Tensor n;

  static NoiseOperatorPair identity(const torch::TensorOptions& opts = torch::kFloat64);

  torch::Tensor apply(const torch::Tensor& x) const { return k * x + n; }
};

/// Applying `first` then `second` equals applying the returned pair:
/// (k2 * k1, k2 * n1 + n2). Throws ShapeError when the fields do not broadcast.
NoiseOperatorPair compose_operator_pairs(const NoiseOperatorPair& first,
                                         const NoiseOperatorPair& second);

/// Residual term k2 * k1 * n_s that a noisy source x + n_s adds on top of the
/// composed pair applied to the clean x. It vanishes for noise-free sources.
torch::Tensor source_noise_term(const NoiseOperatorPair& first, const NoiseOperatorPair& second,
                                const torch::Tensor& source_noise);

}  // namespace s2r::simnoise
