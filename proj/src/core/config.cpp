#include "s2r/core/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>

#include "s2r/core/error.hpp"
#include "s2r/core/rng.hpp"

namespace s2r {
namespace {

using json = nlohmann::json;

NoiseOpConfig op(std::string kind, std::map<std::string, Range> params) {
  return NoiseOpConfig{std::move(kind), std::move(params)};
}

constexpr double kPi = std::numbers::pi;

NoiseOpConfig perspective_op() { return op("perspective", {{"corner_offset", {-0.06, 0.06}}}); }
NoiseOpConfig illumination_op() {
  return op("illumination", {{"strength", {0.0, 0.3}}, {"angle", {0.0, 2 * kPi}}});
}
NoiseOpConfig moire_op() {
  return op("moire", {{"amplitude", {0.0, 0.15}},
                      {"freq", {8.0, 64.0}},
                      {"angle", {0.0, kPi}},
                      {"phase", {0.0, 2 * kPi}}});
}
NoiseOpConfig gaussian_op(double hi) { return op("gaussian", {{"sigma", {0.0, hi}}}); }

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

NoisePipelineConfig pipeline_preset(std::string_view name) {
  NoisePipelineConfig p;
  p.variant_name = std::string(name);
  if (name == "pimog_like") {
    // Geometric stages first, then photometric: display-then-capture order.
    p.ops = {perspective_op(), illumination_op(), moire_op(), gaussian_op(0.08)};
  } else if (name == "stegastamp_like") {
    p.ops = {perspective_op(),
             op("blur", {{"sigma", {0.0, 1.0}}}),
             op("color_shift", {{"gain", {0.9, 1.1}}, {"bias", {-0.05, 0.05}}}),
             gaussian_op(0.05),
             op("jpeg_approx", {{"quality", {50.0, 100.0}}})};
  } else if (name == "ssds_like") {
    p.ops = {perspective_op(), illumination_op(), moire_op(),
             op("grayscale_deviation", {{"delta", {-0.15, 0.15}}}), gaussian_op(0.08)};
  } else if (name == "oracle") {
    p.variant_name = "custom";
    p.ops = {op("blur", {{"sigma", {0.7, 1.2}}}),
             op("color_shift", {{"gain", {0.6, 0.8}}, {"bias", {-0.15, -0.05}}}),
             op("grayscale_deviation", {{"delta", {0.05, 0.2}}}),
             op("jpeg_approx", {{"quality", {40.0, 70.0}}})};
  } else {
    throw ConfigError("unknown noise pipeline preset '" + std::string(name) + "'");
  }
  return p;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.noise_pipeline = pipeline_preset("pimog_like");
  cfg.oracle_pipeline = pipeline_preset("oracle");
  return cfg;
}

void validate(const NoisePipelineConfig& cfg) {
  static const std::set<std::string> kVariants{"pimog_like", "stegastamp_like", "ssds_like",
                                               "custom"};
  static const std::set<std::string> kKinds{"perspective", "illumination", "moire",
                                            "gaussian",    "grayscale_deviation",
                                            "blur",        "color_shift", "jpeg_approx"};
  check(kVariants.count(cfg.variant_name) == 1,
        "unknown noise pipeline variant '" + cfg.variant_name + "'");
  check(!cfg.ops.empty(), "noise pipeline must contain at least one op");
  for (const auto& o : cfg.ops) {
    check(kKinds.count(o.kind) == 1, "unknown noise op kind '" + o.kind + "'");
    for (const auto& [name, r] : o.params) {
      check(r.lo <= r.hi, "range for " + o.kind + "." + name + " has lo > hi");
    }
  }
}

void validate(const RunConfig& cfg) {
  check(cfg.train_resolution >= 8, "train_resolution must be >= 8");
  check(cfg.message_length > 0, "message_length must be positive");
  check(cfg.batch_size > 0, "batch_size must be positive");
  check(cfg.scales_k >= 1, "scales_k must be >= 1");
  check(cfg.train_resolution % (1 << (cfg.scales_k - 1)) == 0,
        "train_resolution must be divisible by 2^(scales_k-1)");
  check(cfg.threads >= 1, "threads must be >= 1");
  check(cfg.gp_pairing == "real_fake" || cfg.gp_pairing == "input_output",
        "gp_pairing must be real_fake or input_output");
  const auto& w = cfg.loss_weights;
  check(w.lambda_G >= 0 && w.lambda_grad >= 0 && w.message_weight >= 0 && w.image_weight >= 0,
        "loss weights must be non-negative");
  check(cfg.generator.base_channels > 0 && cfg.generator.latent_dim >= 0,
        "generator widths must be positive");
  check(cfg.discriminator.base_channels > 0, "discriminator width must be positive");
  check(cfg.codec.channels > 0 && cfg.codec.blocks >= 0, "codec widths must be positive");
  check(cfg.codec.layout == "replicate" || cfg.codec.layout == "dense",
        "codec.layout must be replicate or dense");
  check(w.image_ramp_start >= 0 && w.image_ramp_steps >= 0, "image ramp steps must be non-negative");
  for (const auto* s : {&cfg.s2r, &cfg.watermark, &cfg.supervised}) {
    check(s->steps >= 0 && s->lr > 0 && s->checkpoint_every > 0 && s->log_every > 0,
          "schedule values must be positive");
  }
  check(cfg.chain == "identity" || cfg.chain == "T" || cfg.chain == "TG",
        "chain must be identity, T or TG");
  validate(cfg.noise_pipeline);
  if (!cfg.oracle_pipeline.ops.empty()) validate(cfg.oracle_pipeline);
}

void to_json(json& j, const Range& r) { j = json::array({r.lo, r.hi}); }

void from_json(const json& j, Range& r) {
  if (j.is_number()) {
    r.lo = r.hi = j.get<double>();
  } else {
    check(j.is_array() && j.size() == 2, "range must be [lo, hi]");
    r.lo = j[0].get<double>();
    r.hi = j[1].get<double>();
  }
}

void to_json(json& j, const NoiseOpConfig& c) { j = json{{"kind", c.kind}, {"params", c.params}}; }

void from_json(const json& j, NoiseOpConfig& c) {
  j.at("kind").get_to(c.kind);
  c.params.clear();
  read_if(j, "params", c.params);
}

void to_json(json& j, const NoisePipelineConfig& c) {
  j = json{{"variant_name", c.variant_name}, {"ops", c.ops}};
}

void from_json(const json& j, NoisePipelineConfig& c) {
  if (j.is_string()) {
    c = pipeline_preset(j.get<std::string>());
    return;
  }
  read_if(j, "variant_name", c.variant_name);
  read_if(j, "ops", c.ops);
}

void to_json(json& j, const RunConfig& c) {
  auto sched = [](const ScheduleConfig& s) {
    return json{{"steps", s.steps},         {"lr", s.lr},
                {"beta1", s.beta1},         {"beta2", s.beta2},
                {"checkpoint_every", s.checkpoint_every}, {"log_every", s.log_every}};
  };
  j = json{
      {"seed", c.seed},
      {"train_resolution", c.train_resolution},
      {"message_length", c.message_length},
      {"batch_size", c.batch_size},
      {"scales_k", c.scales_k},
      {"threads", c.threads},
      {"gp_pairing", c.gp_pairing},
      {"loss_weights",
       {{"lambda_G", c.loss_weights.lambda_G},
        {"lambda_grad", c.loss_weights.lambda_grad},
        {"message_weight", c.loss_weights.message_weight},
        {"image_weight", c.loss_weights.image_weight},
        {"image_ramp_start", c.loss_weights.image_ramp_start},
        {"image_ramp_steps", c.loss_weights.image_ramp_steps}}},
      {"noise_pipeline", c.noise_pipeline},
      {"oracle_pipeline", c.oracle_pipeline},
      {"generator",
       {{"base_channels", c.generator.base_channels},
        {"latent_dim", c.generator.latent_dim},
        {"res_blocks", c.generator.res_blocks},
        {"noise_map", c.generator.noise_map}}},
      {"discriminator", {{"base_channels", c.discriminator.base_channels}}},
      {"codec",
       {{"channels", c.codec.channels}, {"blocks", c.codec.blocks}, {"layout", c.codec.layout}}},
      {"perceptual",
       {{"channels", c.perceptual.channels}, {"weights_path", c.perceptual.weights_path}}},
      {"s2r", sched(c.s2r)},
      {"watermark", sched(c.watermark)},
      {"supervised", sched(c.supervised)},
      {"sharp_dir", c.sharp_dir},
      {"real_dir", c.real_dir},
      {"paired_c_dir", c.paired_c_dir},
      {"paired_u_dir", c.paired_u_dir},
      {"eval_dir", c.eval_dir},
      {"output_dir", c.output_dir},
      {"chain", c.chain},
      {"generator_checkpoint", c.generator_checkpoint},
      {"codec_checkpoints", c.codec_checkpoints},
      {"eval_trials", c.eval_trials},
  };
}

void from_json(const json& j, RunConfig& c) {
  auto sched = [](const json& s, ScheduleConfig& out) {
    read_if(s, "steps", out.steps);
    read_if(s, "lr", out.lr);
    read_if(s, "beta1", out.beta1);
    read_if(s, "beta2", out.beta2);
    read_if(s, "checkpoint_every", out.checkpoint_every);
    read_if(s, "log_every", out.log_every);
  };
  read_if(j, "seed", c.seed);
  read_if(j, "train_resolution", c.train_resolution);
  read_if(j, "message_length", c.message_length);
  read_if(j, "batch_size", c.batch_size);
  read_if(j, "scales_k", c.scales_k);
  read_if(j, "threads", c.threads);
  read_if(j, "gp_pairing", c.gp_pairing);
  if (auto it = j.find("loss_weights"); it != j.end()) {
    read_if(*it, "lambda_G", c.loss_weights.lambda_G);
    read_if(*it, "lambda_grad", c.loss_weights.lambda_grad);
    read_if(*it, "message_weight", c.loss_weights.message_weight);
    read_if(*it, "image_weight", c.loss_weights.image_weight);
    read_if(*it, "image_ramp_start", c.loss_weights.image_ramp_start);
    read_if(*it, "image_ramp_steps", c.loss_weights.image_ramp_steps);
  }
  read_if(j, "noise_pipeline", c.noise_pipeline);
  read_if(j, "oracle_pipeline", c.oracle_pipeline);
  if (auto it = j.find("generator"); it != j.end()) {
    read_if(*it, "base_channels", c.generator.base_channels);
    read_if(*it, "latent_dim", c.generator.latent_dim);
    read_if(*it, "res_blocks", c.generator.res_blocks);
    read_if(*it, "noise_map", c.generator.noise_map);
  }
  if (auto it = j.find("discriminator"); it != j.end()) {
    read_if(*it, "base_channels", c.discriminator.base_channels);
  }
  if (auto it = j.find("codec"); it != j.end()) {
    read_if(*it, "channels", c.codec.channels);
    read_if(*it, "blocks", c.codec.blocks);
    read_if(*it, "layout", c.codec.layout);
  }
  if (auto it = j.find("perceptual"); it != j.end()) {
    read_if(*it, "channels", c.perceptual.channels);
    read_if(*it, "weights_path", c.perceptual.weights_path);
  }
  if (auto it = j.find("s2r"); it != j.end()) sched(*it, c.s2r);
  if (auto it = j.find("watermark"); it != j.end()) sched(*it, c.watermark);
  if (auto it = j.find("supervised"); it != j.end()) sched(*it, c.supervised);
  read_if(j, "sharp_dir", c.sharp_dir);
  read_if(j, "real_dir", c.real_dir);
  read_if(j, "paired_c_dir", c.paired_c_dir);
  read_if(j, "paired_u_dir", c.paired_u_dir);
  read_if(j, "eval_dir", c.eval_dir);
  read_if(j, "output_dir", c.output_dir);
  read_if(j, "chain", c.chain);
  read_if(j, "generator_checkpoint", c.generator_checkpoint);
  read_if(j, "codec_checkpoints", c.codec_checkpoints);
  read_if(j, "eval_trials", c.eval_trials);
}

bool apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("S2R_SEED");
  if (env == nullptr || *env == '\0') return false;
  try {
    cfg.seed = std::stoull(env);
  } catch (const std::exception&) {
    throw ConfigError(std::string("S2R_SEED is not an unsigned integer: ") + env);
  }
  return true;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  RunConfig cfg = default_run_config();
  try {
    json j = json::parse(in);
    from_json(j, cfg);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  apply_seed_override(cfg);
  validate(cfg);
  return cfg;
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << json(cfg).dump(2) << '\n';
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(json(cfg).dump())));
  return buf;
}

}  // namespace s2r
