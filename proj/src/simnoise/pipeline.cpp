#include "s2r/simnoise/pipeline.hpp"

#include <cstdio>

#include "s2r/core/error.hpp"
#include "s2r/core/rng.hpp"
#include "s2r/simnoise/ops.hpp"

namespace s2r::simnoise {
namespace {

/// Uniform draw in [lo, hi] from 53 random bits; never leaves the interval.
double draw(std::mt19937_64& eng, const Range& r) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  const double v = r.lo + (r.hi - r.lo) * u;
  return v > r.hi ? r.hi : v;
}

class ParamSampler {
 public:
  ParamSampler(const NoiseOpConfig& op, std::mt19937_64& eng, SampledParams& log, std::string prefix)
      : op_(op), eng_(eng), log_(log), prefix_(std::move(prefix)) {}

  double get(const std::string& name, double neutral, int index = -1) {
    const auto it = op_.params.find(name);
    const double v = it == op_.params.end() ? neutral : draw(eng_, it->second);
    log_[prefix_ + name + (index >= 0 ? "[" + std::to_string(index) + "]" : "")] = v;
    return v;
  }

 private:
  const NoiseOpConfig& op_;
  std::mt19937_64& eng_;
  SampledParams& log_;
  std::string prefix_;
};

torch::Tensor column(const std::vector<double>& v) {
  return torch::tensor(v, torch::kFloat64);
}

}  // namespace

SimulationResult simulate(const torch::Tensor& x, const NoisePipelineConfig& cfg,
                          std::uint64_t seed) {
  validate(cfg);
  auto batch = x.dim() == 3 ? x.unsqueeze(0) : x;
  if (batch.dim() != 4) throw ShapeError("apply_T expects (C, H, W) or (N, C, H, W)");
  const auto n = batch.size(0);
  const auto channels = batch.size(1);

  const SeedTree tree(seed);
  const SeedTree params_tree = tree.child(streams::kNoiseParams);
  SimulationResult result;
  result.parameters.resize(n);

  auto y = batch;
  for (std::size_t i = 0; i < cfg.ops.size(); ++i) {
    const auto& op = cfg.ops[i];
    const std::string prefix = std::to_string(i) + "." + op.kind + ".";
    // One engine per (op, sample): changing batch size or op count never
    // shifts the draws of an earlier sample.
    auto engine_for = [&](int64_t s) {
      return params_tree.child(op.kind, i).engine("sample", static_cast<std::uint64_t>(s));
    };

    if (op.kind == "perspective") {
      auto off = torch::zeros({n, 4, 2}, torch::kFloat64);
      auto a = off.accessor<double, 3>();
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        for (int k = 0; k < 8; ++k) a[s][k / 2][k % 2] = p.get("corner_offset", 0.0, k);
      }
      y = perspective_warp(y, off);
    } else if (op.kind == "illumination") {
      std::vector<double> angle(n), strength(n);
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        strength[s] = p.get("strength", 0.0);
        angle[s] = p.get("angle", 0.0);
      }
      y = illumination(y, column(angle), column(strength));
    } else if (op.kind == "moire") {
      std::vector<double> amp(n), freq(n), angle(n), phase(n);
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        amp[s] = p.get("amplitude", 0.0);
        freq[s] = p.get("freq", 8.0);
        angle[s] = p.get("angle", 0.0);
        phase[s] = p.get("phase", 0.0);
      }
      y = moire(y, column(freq), column(angle), column(amp), column(phase));
    } else if (op.kind == "gaussian") {
      std::vector<double> sigma(n);
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        sigma[s] = p.get("sigma", 0.0);
      }
      y = gaussian_noise(y, column(sigma), tree.child("noise-pixels").generator(op.kind, i));
    } else if (op.kind == "grayscale_deviation") {
      std::vector<double> delta(n);
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        delta[s] = p.get("delta", 0.0);
      }
      y = grayscale_deviation(y, column(delta));
    } else if (op.kind == "blur") {
      std::vector<double> sigma(n);
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        sigma[s] = p.get("sigma", 0.0);
      }
      y = blur(y, column(sigma));
    } else if (op.kind == "color_shift") {
      auto gain = torch::ones({n, channels}, torch::kFloat64);
      auto bias = torch::zeros({n, channels}, torch::kFloat64);
      auto g = gain.accessor<double, 2>();
      auto b = bias.accessor<double, 2>();
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        for (int64_t c = 0; c < channels; ++c) g[s][c] = p.get("gain", 1.0, static_cast<int>(c));
        for (int64_t c = 0; c < channels; ++c) b[s][c] = p.get("bias", 0.0, static_cast<int>(c));
      }
      y = color_shift(y, gain, bias);
    } else if (op.kind == "jpeg_approx") {
      std::vector<double> quality(n);
      for (int64_t s = 0; s < n; ++s) {
        auto eng = engine_for(s);
        ParamSampler p(op, eng, result.parameters[s], prefix);
        quality[s] = p.get("quality", 100.0);
      }
      y = jpeg_approx(y, column(quality));
    } else {
      throw ConfigError("unknown noise op kind '" + op.kind + "'");
    }
  }
  result.images = x.dim() == 3 ? y.squeeze(0) : y;
  return result;
}

torch::Tensor apply_T(const torch::Tensor& x, const NoisePipelineConfig& cfg, std::uint64_t seed) {
  return simulate(x, cfg, seed).images;
}

Image apply_T(const Image& x, const NoisePipelineConfig& cfg, std::uint64_t seed) {
  return Image(apply_T(x.tensor(), cfg, seed).detach());
}

NoisePipelineConfig identity_pipeline() {
  NoisePipelineConfig p;
  p.variant_name = "custom";
  for (const char* kind : {"perspective", "illumination", "moire", "gaussian",
                           "grayscale_deviation", "blur", "color_shift", "jpeg_approx"}) {
    p.ops.push_back(NoiseOpConfig{kind, {}});
  }
  return p;
}

std::string format_params(const SampledParams& p) {
  std::string out;
  char buf[64];
  for (const auto& [k, v] : p) {
    if (!out.empty()) out += ';';
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out += k + "=" + buf;
  }
  return out;
}

}  // namespace s2r::simnoise
