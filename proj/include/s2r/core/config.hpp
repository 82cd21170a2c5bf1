#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace s2r {

/// Closed interval [lo, hi].
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// One distortion stage: its kind and the closed ranges its scalar
/// parameters are drawn from.
struct NoiseOpConfig {
  std::string kind;
  std::map<std::string, Range> params;

  friend bool operator==(const NoiseOpConfig&, const NoiseOpConfig&) = default;
};

struct NoisePipelineConfig {
  std::string variant_name = "custom";
  std::vector<NoiseOpConfig> ops;

  friend bool operator==(const NoisePipelineConfig&, const NoisePipelineConfig&) = default;
};

struct LossWeights {
  double lambda_G = 1.0;
  double lambda_grad = 0.005;
  double message_weight = 1.0;
  double image_weight = 0.7;
  /// image_weight is 0 until image_ramp_start, then ramps linearly to its
  /// full value over image_ramp_steps, so the decoder picks up a signal
  /// before the image term pulls the zero-initialized residual back to nothing.
  std::int64_t image_ramp_start = 0;
  std::int64_t image_ramp_steps = 500;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct GeneratorConfig {
  int base_channels = 16;
  int latent_dim = 8;
  int res_blocks = 1;
  /// Append a per-pixel N(0, 1) map to the input in addition to the broadcast code.
  bool noise_map = false;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct DiscriminatorConfig {
  int base_channels = 16;

  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

struct CodecConfig {
  int channels = 32;
  int blocks = 4;
  /// "replicate": message tiled over the image plane, decoder global-pools.
  /// "dense": message projected to a coarse map, decoder reads the flattened
  /// feature map.
  std::string layout = "replicate";

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

struct PerceptualConfig {
  int channels = 16;
  /// Optional TorchScript-free weight archive for the three extractor convs.
  std::string weights_path;

  friend bool operator==(const PerceptualConfig&, const PerceptualConfig&) = default;
};

struct ScheduleConfig {
  std::int64_t steps = 2000;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::int64_t checkpoint_every = 500;
  std::int64_t log_every = 1;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

/// Every knob of a run. Identical RunConfig + identical dataset ordering give
/// bit-identical batch streams.
struct RunConfig {
  std::uint64_t seed = 0;
  int train_resolution = 128;
  int message_length = 64;
  int batch_size = 8;
  int scales_k = 3;
  int threads = 1;
  /// Gradient-penalty interpolation anchor: "real_fake" mixes y^u with
  /// G(y^c); "input_output" mixes y^c with G(y^c).
  std::string gp_pairing = "real_fake";

  LossWeights loss_weights;
  NoisePipelineConfig noise_pipeline;
  /// Stand-in for physical capture: a distortion pipeline hidden from training.
  NoisePipelineConfig oracle_pipeline;

  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  CodecConfig codec;
  PerceptualConfig perceptual;

  ScheduleConfig s2r{2000, 2e-4, 0.5, 0.999, 500, 1};
  ScheduleConfig watermark{2000, 1e-3, 0.9, 0.999, 500, 1};
  ScheduleConfig supervised{1000, 2e-4, 0.5, 0.999, 500, 1};

  std::string sharp_dir = "data/sharp";
  std::string real_dir = "data/real_sc";
  std::string paired_c_dir;
  std::string paired_u_dir;
  std::string eval_dir;
  std::string output_dir = "runs/default";

  /// Noise chain used by train-watermark: identity, T or TG.
  std::string chain = "T";
  std::string generator_checkpoint;
  /// chain name -> codec checkpoint directory, consumed by evaluate.
  std::map<std::string, std::string> codec_checkpoints;
  int eval_trials = 4;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Distortion presets modelled on published SC noise layers: pimog_like,
/// stegastamp_like, ssds_like. "oracle" names the hidden capture stand-in,
/// whose op set is disjoint from pimog_like.
NoisePipelineConfig pipeline_preset(std::string_view name);

/// Full-size defaults (128 px, 64-bit messages, pimog_like + oracle).
RunConfig default_run_config();

/// Throws ConfigError on any violated field constraint.
void validate(const RunConfig& cfg);
void validate(const NoisePipelineConfig& cfg);

void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
void to_json(nlohmann::json& j, const NoiseOpConfig& c);
void from_json(const nlohmann::json& j, NoiseOpConfig& c);
void to_json(nlohmann::json& j, const NoisePipelineConfig& c);
void from_json(const nlohmann::json& j, NoisePipelineConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Reads a JSON config. Missing keys keep their defaults; the S2R_SEED
/// environment variable, when set, overrides `seed`.
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Applies S2R_SEED if present. Returns true when it did.
bool apply_seed_override(RunConfig& cfg);

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace s2r
