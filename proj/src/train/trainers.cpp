#include "s2r/train/trainers.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "s2r/core/error.hpp"
#include "s2r/core/rng.hpp"
#include "s2r/simnoise/pipeline.hpp"
#include "s2r/train/checkpoint.hpp"

namespace fs = std::filesystem;

namespace s2r::train {
namespace {

constexpr double kDivergenceLimit = 1e4;

void guard(const torch::Tensor& loss, const char* name, std::int64_t step) {
  const double v = loss.item<double>();
  if (!std::isfinite(v) || std::abs(v) > kDivergenceLimit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s diverged at step %lld (value %g)", name,
                  static_cast<long long>(step), v);
    throw NumericError(buf);
  }
}

torch::optim::Adam make_adam(std::vector<torch::Tensor> params, const ScheduleConfig& s) {
  return torch::optim::Adam(std::move(params),
                            torch::optim::AdamOptions(s.lr).betas({s.beta1, s.beta2}));
}

std::string step_dir(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06lld", static_cast<long long>(step));
  return buf;
}

/// Loss CSV that truncates on a fresh run and appends on resume.
template <class Record>
class CsvLog {
 public:
  CsvLog(const fs::path& dir, bool resume) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    const auto path = dir / "loss.csv";
    const bool header = !resume || !fs::exists(path);
    out_.open(path, resume ? std::ios::app : std::ios::trunc);
    if (!out_) throw IoError("cannot write " + path.string());
    if (header) write_csv_header(out_, static_cast<const Record*>(nullptr));
  }

  void write(const Record& r) {
    if (out_.is_open()) {
      write_csv_row(out_, r);
      out_.flush();
    }
  }

 private:
  std::ofstream out_;
};

CheckpointMeta meta_for(const char* kind, std::int64_t step, const RunConfig& cfg) {
  CheckpointMeta m;
  m.kind = kind;
  m.step = step;
  m.seed = cfg.seed;
  m.config = nlohmann::json(cfg);
  return m;
}

RunConfig config_from_meta(const CheckpointMeta& meta) {
  RunConfig cfg = default_run_config();
  from_json(meta.config, cfg);
  return cfg;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

S2RState::S2RState(const RunConfig& cfg)
    : G([&] {
        torch::manual_seed(SeedTree(cfg.seed).derive(streams::kInit, 0));
        return translator::GeneratorNet(translator::GeneratorOptions::from(cfg));
      }()),
      D([&] {
        torch::manual_seed(SeedTree(cfg.seed).derive(streams::kInit, 1));
        return translator::DiscriminatorNet(translator::DiscriminatorOptions::from(cfg));
      }()),
      phi(cfg.perceptual.channels, SeedTree(cfg.seed).derive(streams::kInit, 2),
          cfg.perceptual.weights_path),
      opt_G(make_adam(G->parameters(), cfg.s2r)),
      opt_D(make_adam(D->parameters(), cfg.s2r)) {}

S2RLossRecord s2r_step(S2RState& state, const RunConfig& cfg, const torch::Tensor& sharp,
                       const torch::Tensor& real, std::int64_t step) {
  const SeedTree tree(cfg.seed);
  const auto& w = cfg.loss_weights;
  const auto n = sharp.size(0);

  auto y_c = simnoise::apply_T(sharp, cfg.noise_pipeline,
                               tree.child(streams::kNoiseParams).derive("T", step))
                 .detach();
  auto z = translator::LatentCode::sample(n, cfg.generator.latent_dim,
                                          tree.generator(streams::kLatent, step))
               .z;
  auto outputs = state.G->forward(y_c, z, tree.generator("noise-map", step));
  auto fake = outputs.back();

  state.opt_D.zero_grad();
  auto fake_detached = fake.detach();
  auto objective = losses::adv_objective(state.D->forward(real), state.D->forward(fake_detached));
  auto eps = torch::rand({n}, tree.generator(streams::kInterpolation, step));
  const auto& anchor = cfg.gp_pairing == "input_output" ? y_c : real;
  auto y_tilde = translator::interpolate_samples(anchor, fake_detached, eps);
  auto gp = losses::gradient_penalty([&](const torch::Tensor& y) { return state.D->forward(y); },
                                     y_tilde);
  auto loss_D = losses::total_D(objective, gp, w);
  guard(loss_D, "total_D", step);
  loss_D.backward();
  state.opt_D.step();

  state.opt_G.zero_grad();
  auto adv_G = losses::adv_loss(torch::Tensor(), state.D->forward(fake), losses::Side::generator);
  auto perc = losses::perceptual_multiscale(outputs, state.G->pyramid(y_c), state.phi,
                                            cfg.scales_k);
  auto loss_G = losses::total_G(adv_G, perc, w);
  guard(loss_G, "total_G", step);
  loss_G.backward();
  state.opt_G.step();

  return {step,
          loss_G.item<double>(),
          adv_G.item<double>(),
          perc.item<double>(),
          loss_D.item<double>(),
          gp.item<double>()};
}

S2RResult train_s2r(const UnpairedDataset& data, const RunConfig& cfg, const TrainOptions& opts) {
  validate(cfg);
  if (data.sharp_set.empty() || data.real_sc_set.empty()) {
    throw ConfigError("train_s2r needs non-empty sharp and real sets");
  }
  S2RResult result;
  result.state = std::make_shared<S2RState>(cfg);
  auto& st = *result.state;
  if (opts.resume_from) {
    auto meta = read_checkpoint_meta(*opts.resume_from);
    load_checkpoint(*opts.resume_from, {{"generator", st.G.get()}, {"discriminator", st.D.get()}},
                    {{"generator", &st.opt_G}, {"discriminator", &st.opt_D}});
    st.step = meta.step;
  }
  const SeedTree tree(cfg.seed);
  BatchStream sharp(data.sharp_set, cfg.batch_size, tree.derive(streams::kDataOrder, 0));
  BatchStream real(data.real_sc_set, cfg.batch_size, tree.derive(streams::kDataOrder, 1));
  const std::int64_t total = opts.steps.value_or(cfg.s2r.steps);

  if (!opts.output_dir.empty()) save_run_config(cfg, opts.output_dir / "config.json");
  CsvLog<S2RLossRecord> log(opts.output_dir, opts.resume_from.has_value());
  auto save = [&](const fs::path& dir) {
    save_checkpoint(dir, meta_for("s2r", st.step, cfg),
                    {{"generator", st.G.get()}, {"discriminator", st.D.get()}},
                    {{"generator", &st.opt_G}, {"discriminator", &st.opt_D}});
  };

  fs::path last_good;
  for (std::int64_t s = st.step; s < total; ++s) {
    S2RLossRecord rec;
    try {
      rec = s2r_step(st, cfg, sharp.batch(s), real.batch(s), s);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + "; last good checkpoint: " +
                         (last_good.empty() ? std::string("none") : last_good.string()));
    }
    st.step = s + 1;
    result.history.push_back(rec);
    if (s % cfg.s2r.log_every == 0) log.write(rec);
    if (opts.verbose && st.step % 100 == 0) {
      std::cerr << "s2r step " << st.step << " G=" << rec.total_G << " D=" << rec.total_D
                << " gp=" << rec.gp << '\n';
    }
    if (!opts.output_dir.empty() && st.step % cfg.s2r.checkpoint_every == 0) {
      last_good = opts.output_dir / "checkpoints" / step_dir(st.step);
      save(last_good);
    }
  }
  if (!opts.output_dir.empty()) {
    result.checkpoint = opts.output_dir / "final";
    save(result.checkpoint);
  }
  return result;
}

SupervisedResult train_s2r_supervised(const std::vector<Image>& simulated,
                                      const std::vector<Image>& real, const RunConfig& cfg,
                                      const TrainOptions& opts) {
  validate(cfg);
  if (simulated.size() != real.size()) {
    throw ConfigError("supervised pairs differ in length: " + std::to_string(simulated.size()) +
                      " vs " + std::to_string(real.size()));
  }
  if (simulated.empty()) throw ConfigError("supervised training needs at least one pair");
  const SeedTree tree(cfg.seed);
  SupervisedResult result;
  torch::manual_seed(tree.derive(streams::kInit, 0));
  result.G = translator::GeneratorNet(translator::GeneratorOptions::from(cfg));
  losses::PerceptualExtractor phi(cfg.perceptual.channels, tree.derive(streams::kInit, 2),
                                  cfg.perceptual.weights_path);
  auto opt = make_adam(result.G->parameters(), cfg.supervised);
  std::int64_t start = 0;
  if (opts.resume_from) {
    start = read_checkpoint_meta(*opts.resume_from).step;
    load_checkpoint(*opts.resume_from, {{"generator", result.G.get()}}, {{"generator", &opt}});
  }
  BatchStream order(simulated, cfg.batch_size, tree.derive(streams::kDataOrder, 0));
  const std::int64_t total = opts.steps.value_or(cfg.supervised.steps);
  if (!opts.output_dir.empty()) save_run_config(cfg, opts.output_dir / "config.json");
  CsvLog<SupervisedLossRecord> log(opts.output_dir, opts.resume_from.has_value());
  auto save = [&](const fs::path& dir, std::int64_t step) {
    save_checkpoint(dir, meta_for("s2r_supervised", step, cfg),
                    {{"generator", result.G.get()}}, {{"generator", &opt}});
  };

  for (std::int64_t s = start; s < total; ++s) {
    std::vector<torch::Tensor> xs, ys;
    for (auto i : order.indices(s)) {
      xs.push_back(simulated[i].tensor());
      ys.push_back(real[i].tensor());
    }
    auto y_c = torch::stack(xs);
    auto y_u = torch::stack(ys);
    auto z = translator::LatentCode::sample(y_c.size(0), cfg.generator.latent_dim,
                                            tree.generator(streams::kLatent, s))
                 .z;
    opt.zero_grad();
    auto outputs = result.G->forward(y_c, z, tree.generator("noise-map", s));
    auto targets = result.G->pyramid(y_u);
    auto perc = losses::perceptual_multiscale(outputs, targets, phi, cfg.scales_k);
    torch::Tensor l1 = torch::zeros({});
    for (int i = 0; i < cfg.scales_k; ++i) l1 = l1 + (outputs[i] - targets[i]).abs().mean();
    l1 = l1 / cfg.scales_k;
    auto loss = perc + l1;
    guard(loss, "supervised loss", s);
    loss.backward();
    opt.step();
    SupervisedLossRecord rec{s, loss.item<double>(), perc.item<double>(), l1.item<double>()};
    result.history.push_back(rec);
    if (s % cfg.supervised.log_every == 0) log.write(rec);
    if (!opts.output_dir.empty() && (s + 1) % cfg.supervised.checkpoint_every == 0) {
      save(opts.output_dir / "checkpoints" / step_dir(s + 1), s + 1);
    }
  }
  if (!opts.output_dir.empty()) {
    result.checkpoint = opts.output_dir / "final";
    save(result.checkpoint, total);
  }
  return result;
}

translator::GeneratorNet load_generator(const fs::path& dir) {
  const auto meta = read_checkpoint_meta(dir);
  if (meta.kind != "s2r" && meta.kind != "s2r_supervised") {
    throw ConfigError("checkpoint " + dir.string() + " holds a " + meta.kind +
                      " model, not a generator");
  }
  const auto cfg = config_from_meta(meta);
  translator::GeneratorNet G(translator::GeneratorOptions::from(cfg));
  load_checkpoint(dir, {{"generator", G.get()}});
  for (auto& p : G->parameters()) p.requires_grad_(false);
  G->eval();
  return G;
}

ChainKind parse_chain(const std::string& name) {
  if (name == "identity") return ChainKind::identity;
  if (name == "T") return ChainKind::T;
  if (name == "TG") return ChainKind::TG;
  throw ConfigError("unknown noise chain '" + name + "' (identity, T, TG)");
}

std::string chain_name(ChainKind kind) {
  switch (kind) {
    case ChainKind::identity: return "identity";
    case ChainKind::T: return "T";
    case ChainKind::TG: return "TG";
  }
  return "?";
}

NoiseChain::NoiseChain(ChainKind kind, NoisePipelineConfig pipeline, std::uint64_t seed,
                       translator::GeneratorNet generator)
    : kind_(kind), pipeline_(std::move(pipeline)), seed_(seed), generator_(std::move(generator)) {
  if (kind_ == ChainKind::TG) {
    if (!generator_) throw ConfigError("the TG chain needs a trained generator checkpoint");
    for (auto& p : generator_->parameters()) p.requires_grad_(false);
    generator_->eval();
  }
}

torch::Tensor NoiseChain::apply(const torch::Tensor& x, std::int64_t step) const {
  if (kind_ == ChainKind::identity) return x;
  const SeedTree tree(seed_);
  auto y = simnoise::apply_T(x, pipeline_, tree.child(streams::kNoiseParams).derive("chain", step));
  if (kind_ == ChainKind::T) return y;
  auto& G = const_cast<translator::GeneratorNet&>(generator_);
  auto z = translator::LatentCode::sample(x.size(0), G->options().latent_dim,
                                          tree.generator(streams::kLatent, step), x.options())
               .z;
  return G->translate(y, z, tree.generator("noise-map", step));
}

WatermarkResult train_watermark(const std::vector<Image>& covers, const NoiseChain& chain,
                                const RunConfig& cfg, const TrainOptions& opts) {
  validate(cfg);
  if (covers.empty()) throw ConfigError("train_watermark needs at least one cover image");
  const SeedTree tree(cfg.seed);
  const auto codec_opts = watermark::CodecOptions::from(cfg);
  WatermarkResult result;
  torch::manual_seed(tree.derive(streams::kInit, 10));
  result.codec.encoder = watermark::EncoderNet(codec_opts);
  torch::manual_seed(tree.derive(streams::kInit, 11));
  result.codec.decoder = watermark::DecoderNet(codec_opts);
  auto params = result.codec.encoder->parameters();
  for (auto& p : result.codec.decoder->parameters()) params.push_back(p);
  auto opt = make_adam(params, cfg.watermark);

  std::int64_t start = 0;
  auto modules = std::map<std::string, torch::nn::Module*>{
      {"encoder", result.codec.encoder.get()}, {"decoder", result.codec.decoder.get()}};
  if (opts.resume_from) {
    start = read_checkpoint_meta(*opts.resume_from).step;
    load_checkpoint(*opts.resume_from, modules, {{"codec", &opt}});
  }
  BatchStream stream(covers, cfg.batch_size, tree.derive(streams::kDataOrder, 2));
  const std::int64_t total = opts.steps.value_or(cfg.watermark.steps);
  if (!opts.output_dir.empty()) save_run_config(cfg, opts.output_dir / "config.json");
  CsvLog<WatermarkLossRecord> log(opts.output_dir, opts.resume_from.has_value());
  auto save = [&](const fs::path& dir, std::int64_t step) {
    save_checkpoint(dir, meta_for("codec", step, cfg), modules, {{"codec", &opt}});
  };

  for (std::int64_t s = start; s < total; ++s) {
    auto cover = stream.batch(s);
    auto bits = torch::bernoulli(torch::full({cover.size(0), cfg.message_length}, 0.5),
                                 tree.generator(streams::kMessages, s));
    opt.zero_grad();
    auto marked = result.codec.encoder->forward(cover, bits);
    auto noisy = chain.apply(marked, s);
    auto logits = result.codec.decoder->forward(noisy);
    auto weights = cfg.loss_weights;
    weights.image_weight *= losses::ramp(s, weights.image_ramp_start, weights.image_ramp_steps);
    auto loss = losses::watermark_loss(logits, bits, marked, cover, weights);
    guard(loss.total, "watermark loss", s);
    loss.total.backward();
    opt.step();
    const double ber =
        100.0 * (watermark::hard_bits(torch::sigmoid(logits.detach())).to(torch::kFloat32) != bits)
                    .to(torch::kFloat64)
                    .mean()
                    .item<double>();
    WatermarkLossRecord rec{s, loss.total.item<double>(), loss.message.item<double>(),
                            loss.image.item<double>(), ber};
    result.history.push_back(rec);
    if (s % cfg.watermark.log_every == 0) log.write(rec);
    if (opts.verbose && (s + 1) % 100 == 0) {
      std::cerr << "watermark[" << chain_name(chain.kind()) << "] step " << s + 1
                << " loss=" << rec.total << " ber=" << rec.ber << '\n';
    }
    if (!opts.output_dir.empty() && (s + 1) % cfg.watermark.checkpoint_every == 0) {
      save(opts.output_dir / "checkpoints" / step_dir(s + 1), s + 1);
    }
  }
  if (!opts.output_dir.empty()) {
    result.checkpoint = opts.output_dir / "final";
    save(result.checkpoint, total);
  }
  return result;
}

Codec load_codec(const fs::path& dir) {
  const auto meta = read_checkpoint_meta(dir);
  if (meta.kind != "codec") {
    throw ConfigError("checkpoint " + dir.string() + " holds a " + meta.kind + " model, not a codec");
  }
  const auto opts = watermark::CodecOptions::from(config_from_meta(meta));
  Codec codec{watermark::EncoderNet(opts), watermark::DecoderNet(opts)};
  load_checkpoint(dir, {{"encoder", codec.encoder.get()}, {"decoder", codec.decoder.get()}});
  codec.encoder->eval();
  codec.decoder->eval();
  return codec;
}

void write_csv_header(std::ostream& out, const S2RLossRecord*) {
  out << "step,total_G,adv_G,perc,total_D,gp\n";
}

void write_csv_row(std::ostream& out, const S2RLossRecord& r) {
  out << r.step << ',' << fmt(r.total_G) << ',' << fmt(r.adv_G) << ',' << fmt(r.perc) << ','
      << fmt(r.total_D) << ',' << fmt(r.gp) << '\n';
}

void write_csv_header(std::ostream& out, const WatermarkLossRecord*) {
  out << "step,total,message_loss,image_loss,ber\n";
}

void write_csv_row(std::ostream& out, const WatermarkLossRecord& r) {
  out << r.step << ',' << fmt(r.total) << ',' << fmt(r.message) << ',' << fmt(r.image) << ','
      << fmt(r.ber) << '\n';
}

void write_csv_header(std::ostream& out, const SupervisedLossRecord*) {
  out << "step,total,perc,l1\n";
}

void write_csv_row(std::ostream& out, const SupervisedLossRecord& r) {
  out << r.step << ',' << fmt(r.total) << ',' << fmt(r.perc) << ',' << fmt(r.l1) << '\n';
}

}  // namespace s2r::train
