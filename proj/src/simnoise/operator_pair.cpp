#include "s2r/simnoise/operator_pair.hpp"

#include "s2r/core/error.hpp"

namespace s2r::simnoise {
namespace {

std::vector<int64_t> broadcast_shape(const torch::Tensor& a, const torch::Tensor& b) {
  try {
    return at::infer_size(a.sizes(), b.sizes());
  } catch (const c10::Error&) {
    throw ShapeError("operator fields are not broadcast-compatible: " + std::to_string(a.dim()) +
                     "-d vs " + std::to_string(b.dim()) + "-d");
  }
}

}  // namespace

NoiseOperatorPair NoiseOperatorPair::identity(const torch::TensorOptions& opts) {
  return {torch::ones({}, opts), torch::zeros({}, opts)};
}

NoiseOperatorPair compose_operator_pairs(const NoiseOperatorPair& first,
                                         const NoiseOperatorPair& second) {
  broadcast_shape(first.k, first.n);
  broadcast_shape(second.k, second.n);
  broadcast_shape(first.k, second.k);
  broadcast_shape(second.k, first.n);
  return {second.k * first.k, second.k * first.n + second.n};
}

torch::Tensor source_noise_term(const NoiseOperatorPair& first, const NoiseOperatorPair& second,
                                const torch::Tensor& source_noise) {
  return second.k * first.k * source_noise;
}

}  // namespace s2r::simnoise
