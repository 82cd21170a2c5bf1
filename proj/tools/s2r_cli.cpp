// Command-line front end: data simulation, the three training phases,
// watermark embed/extract, evaluation reports and plotting.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "s2r/core/config.hpp"
#include "s2r/core/dataset.hpp"
#include "s2r/core/error.hpp"
#include "s2r/core/message.hpp"
#include "s2r/eval/metrics.hpp"
#include "s2r/eval/plot.hpp"
#include "s2r/eval/report.hpp"
#include "s2r/simnoise/pipeline.hpp"
#include "s2r/train/trainers.hpp"
#include "s2r/watermark/codec.hpp"

namespace fs = std::filesystem;
using namespace s2r;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::string resume;
  std::string output;
  bool verbose = false;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.output.empty()) cfg.output_dir = c.output;
  validate(cfg);
  torch::set_num_threads(cfg.threads);
  return cfg;
}

train::TrainOptions train_options(const Common& c, const fs::path& dir) {
  train::TrainOptions o;
  o.output_dir = dir;
  o.steps = c.steps;
  o.verbose = c.verbose;
  if (!c.resume.empty()) o.resume_from = c.resume;
  return o;
}

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("config", c.config, "run config (JSON)");
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "override the config seed");
}

void add_training(CLI::App* app, Common& c) {
  add_common(app, c, true);
  app->add_option("--steps", c.steps, "override the step budget");
  app->add_option("--resume", c.resume, "checkpoint directory to resume from");
  app->add_option("--output", c.output, "override output_dir");
  app->add_flag("-v,--verbose", c.verbose);
}

void print_error(const std::string& code, const std::string& message) {
  nlohmann::json j{{"code", code}, {"message", message}};
  std::cerr << "error: " << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S2R screen-camera watermarking toolkit"};
  app.require_subcommand(1);

  Common common;

  // simulate
  std::string sim_in, sim_out, sim_preset;
  int sim_res = 0;
  auto* sim = app.add_subcommand("simulate", "apply the simulated distortion T to a directory");
  add_common(sim, common, false);
  sim->add_option("--input", sim_in)->required();
  sim->add_option("--output", sim_out)->required();
  sim->add_option("--pipeline", sim_preset, "preset name instead of the config pipeline");
  sim->add_option("--resolution", sim_res, "square working size (default: config)");

  auto* ts2r = app.add_subcommand("train-s2r", "unpaired training of the translator G");
  add_training(ts2r, common);

  std::string wm_chain, wm_generator;
  auto* twm = app.add_subcommand("train-watermark", "train the encoder/decoder through a noise chain");
  add_training(twm, common);
  twm->add_option("--chain", wm_chain, "identity, T or TG (default: config)");
  twm->add_option("--generator", wm_generator, "translator checkpoint for the TG chain");

  auto* tsup = app.add_subcommand("train-s2r-supervised", "paired ablation training of G");
  add_training(tsup, common);

  std::string em_image, em_msg, em_ckpt, em_out;
  auto* emb = app.add_subcommand("embed", "watermark one image at any resolution");
  emb->add_option("--image", em_image)->required();
  emb->add_option("--message-hex", em_msg, "hex digits or a bitstring")->required();
  emb->add_option("--checkpoint", em_ckpt)->required();
  emb->add_option("--out", em_out)->required();

  std::string ex_image, ex_ckpt;
  auto* ext = app.add_subcommand("extract", "decode the message from an image");
  ext->add_option("--image", ex_image)->required();
  ext->add_option("--checkpoint", ex_ckpt)->required();

  std::string ev_out;
  auto* evs = app.add_subcommand("evaluate", "codec comparison under the oracle channel");
  add_common(evs, common, true);
  evs->add_option("--out", ev_out, "report directory (default: <output_dir>/eval)");

  std::string hc_a, hc_b, hc_csv;
  int hc_res = 0;
  auto* hcs = app.add_subcommand("hist-compare", "histogram distance between two image sets");
  hcs->add_option("--a", hc_a)->required();
  hcs->add_option("--b", hc_b)->required();
  hcs->add_option("--csv", hc_csv, "write the curves here");
  hcs->add_option("--resolution", hc_res, "resize before comparing (0 keeps 128)");

  std::string pl_csv, pl_out, pl_title;
  std::vector<std::string> pl_cols;
  auto* plt = app.add_subcommand("plot", "line chart of a CSV");
  plt->add_option("--csv", pl_csv)->required();
  plt->add_option("--out", pl_out)->required();
  plt->add_option("--columns", pl_cols, "columns to draw, comma separated (default: all)")->delimiter(',');
  plt->add_option("--title", pl_title);

  std::string sy_out, sy_real;
  int sy_count = 64, sy_res = 32;
  std::uint64_t sy_seed = 0;
  auto* syn = app.add_subcommand("synth-data", "procedural sharp images and oracle captures");
  syn->add_option("--out", sy_out)->required();
  syn->add_option("--real-out", sy_real, "also write oracle-distorted copies of a second set");
  syn->add_option("--count", sy_count);
  syn->add_option("--resolution", sy_res);
  syn->add_option("--seed", sy_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      RunConfig cfg = resolve(common);
      const auto pipeline = sim_preset.empty() ? cfg.noise_pipeline : pipeline_preset(sim_preset);
      std::vector<fs::path> names;
      auto images = load_image_dir(sim_in, sim_res > 0 ? sim_res : cfg.train_resolution, &names);
      auto result = simnoise::simulate(stack(images), pipeline, cfg.seed);
      fs::create_directories(sim_out);
      std::ofstream log(fs::path(sim_out) / "params.csv");
      log << "filename,params\n";
      for (std::size_t i = 0; i < images.size(); ++i) {
        const auto name = names[i].stem().string() + ".png";
        write_png(fs::path(sim_out) / name, result.images[static_cast<int64_t>(i)]);
        log << name << ',' << simnoise::format_params(result.parameters[i]) << "\n";
      }
      std::cout << "wrote " << images.size() << " images to " << sim_out << "\n";
    } else if (ts2r->parsed()) {
      RunConfig cfg = resolve(common);
      auto data = load_unpaired_dataset(cfg.sharp_dir, cfg.real_dir, cfg.train_resolution);
      auto res = train::train_s2r(data, cfg, train_options(common, fs::path(cfg.output_dir) / "s2r"));
      std::cout << "checkpoint " << res.checkpoint.string() << "\n";
    } else if (twm->parsed()) {
      RunConfig cfg = resolve(common);
      if (!wm_chain.empty()) cfg.chain = wm_chain;
      if (!wm_generator.empty()) cfg.generator_checkpoint = wm_generator;
      const auto kind = train::parse_chain(cfg.chain);
      translator::GeneratorNet G{nullptr};
      if (kind == train::ChainKind::TG) {
        if (cfg.generator_checkpoint.empty()) {
          throw ConfigError("chain TG needs generator_checkpoint");
        }
        G = train::load_generator(cfg.generator_checkpoint);
      }
      train::NoiseChain chain(kind, cfg.noise_pipeline, cfg.seed, G);
      auto covers = load_image_dir(cfg.sharp_dir, cfg.train_resolution);
      const auto dir = fs::path(cfg.output_dir) / ("watermark_" + train::chain_name(kind));
      auto res = train::train_watermark(covers, chain, cfg, train_options(common, dir));
      std::cout << "checkpoint " << res.checkpoint.string() << "\n";
    } else if (tsup->parsed()) {
      RunConfig cfg = resolve(common);
      if (cfg.paired_c_dir.empty() || cfg.paired_u_dir.empty()) {
        throw ConfigError("supervised training needs paired_c_dir and paired_u_dir");
      }
      auto c = load_image_dir(cfg.paired_c_dir, cfg.train_resolution);
      auto u = load_image_dir(cfg.paired_u_dir, cfg.train_resolution);
      auto res = train::train_s2r_supervised(
          c, u, cfg, train_options(common, fs::path(cfg.output_dir) / "supervised"));
      std::cout << "checkpoint " << res.checkpoint.string() << "\n";
    } else if (emb->parsed()) {
      torch::NoGradGuard guard;
      auto codec = train::load_codec(em_ckpt);
      const auto length = static_cast<std::size_t>(codec.encoder->options().message_length);
      auto msg = WatermarkMessage::parse(em_msg, length);
      auto img = read_image_u8(em_image);
      if (!img) throw IoError("cannot decode " + em_image);
      auto out = watermark::resolution_scale_embed(*img, msg, codec.encoder);
      write_png(em_out, out);
      std::cout << "wrote " << em_out << "\n";
    } else if (ext->parsed()) {
      torch::NoGradGuard guard;
      auto codec = train::load_codec(ex_ckpt);
      auto img = read_image_u8(ex_image);
      if (!img) throw IoError("cannot decode " + ex_image);
      const int res = codec.decoder->options().resolution;
      auto decoded = watermark::decode(prepare_image(*img, res), codec.decoder);
      nlohmann::json j{{"message_hex", decoded.message.to_hex()}, {"scores", decoded.scores}};
      std::cout << j.dump() << "\n";
    } else if (evs->parsed()) {
      RunConfig cfg = resolve(common);
      auto report = eval::run_codec_comparison(cfg);
      const fs::path dir = ev_out.empty() ? fs::path(cfg.output_dir) / "eval" : fs::path(ev_out);
      fs::create_directories(dir);
      std::ofstream(dir / "report.json") << eval::to_json(report).dump(2) << "\n";
      std::ofstream csv(dir / "report.csv");
      eval::write_csv(csv, report);
      for (const auto& a : report.aggregates) {
        std::printf("%-10s psnr %.2f dB  ssim %.4f  ber %.2f%%\n", a.chain.c_str(), a.psnr_db.mean,
                    a.ssim.mean, a.ber_percent.mean);
      }
    } else if (hcs->parsed()) {
      const int res = hc_res > 0 ? hc_res : 128;
      auto cmp = eval::hist_compare(load_image_dir(hc_a, res), load_image_dir(hc_b, res));
      if (!hc_csv.empty()) {
        std::ofstream out(hc_csv);
        eval::write_histogram_csv(out, cmp);
      }
      std::printf("distance %.9g\n", cmp.distance);
    } else if (plt->parsed()) {
      eval::plot_csv(eval::read_csv(pl_csv), pl_out, pl_cols, pl_title);
      std::cout << "wrote " << pl_out << "\n";
    } else if (syn->parsed()) {
      fs::create_directories(sy_out);
      char name[32];
      auto sharp = synthetic_images(sy_count, sy_res, sy_seed);
      for (int i = 0; i < sy_count; ++i) {
        std::snprintf(name, sizeof name, "img_%04d.png", i);
        write_png(fs::path(sy_out) / name, sharp[i].tensor());
      }
      if (!sy_real.empty()) {
        fs::create_directories(sy_real);
        auto other = stack(synthetic_images(sy_count, sy_res, sy_seed + 1));
        auto real = simnoise::apply_T(other, pipeline_preset("oracle"), sy_seed + 2);
        for (int i = 0; i < sy_count; ++i) {
          std::snprintf(name, sizeof name, "cap_%04d.png", i);
          write_png(fs::path(sy_real) / name, real[i]);
        }
      }
    }
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 2;
  } catch (const c10::Error& e) {
    print_error("torch", e.what_without_backtrace());
    return 3;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
