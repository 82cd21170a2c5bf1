#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "s2r/core/config.hpp"
#include "s2r/core/image.hpp"

namespace s2r::simnoise {

/// Parameters actually drawn for one sample, keyed "<op index>.<kind>.<param>".
using SampledParams = std::map<std::string, double>;

struct SimulationResult {
  torch::Tensor images;                    // (N, C, H, W)
  std::vector<SampledParams> parameters;   // one entry per sample
};

/// The simulated screen-camera transform T. Parameters are drawn uniformly
/// inside each configured range, independently per sample, from substreams of
/// `seed`; the result is a pure function of (x, cfg, seed) and differentiable
/// in x. Unset parameters take their neutral value.
SimulationResult simulate(const torch::Tensor& x, const NoisePipelineConfig& cfg,
                          std::uint64_t seed);

torch::Tensor apply_T(const torch::Tensor& x, const NoisePipelineConfig& cfg, std::uint64_t seed);
Image apply_T(const Image& x, const NoisePipelineConfig& cfg, std::uint64_t seed);

/// Pipeline whose every op sits at its neutral parameters.
NoisePipelineConfig identity_pipeline();

/// Flatten sampled parameters as "key=value;..." for the CSV parameter log.
std::string format_params(const SampledParams& p);

}  // namespace s2r::simnoise
