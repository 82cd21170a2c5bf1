#include "s2r/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "s2r/core/dataset.hpp"
#include "s2r/core/error.hpp"
#include "s2r/core/rng.hpp"
#include "s2r/eval/metrics.hpp"
#include "s2r/simnoise/pipeline.hpp"
#include "s2r/watermark/codec.hpp"

namespace s2r::eval {
namespace {

Stat stat(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(v.size()));
  return s;
}

nlohmann::json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }

}  // namespace

std::vector<ChainAggregate> aggregate(const std::vector<EvalRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<double>, 3>> values;
  for (const auto& r : rows) {
    if (!values.count(r.chain)) order.push_back(r.chain);
    auto& v = values[r.chain];
    v[0].push_back(r.psnr_db);
    v[1].push_back(r.ssim);
    v[2].push_back(r.ber_percent);
  }
  std::vector<ChainAggregate> out;
  for (const auto& chain : order) {
    const auto& v = values[chain];
    out.push_back({chain, v[0].size(), stat(v[0]), stat(v[1]), stat(v[2])});
  }
  return out;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"image", r.image},
                    {"chain", r.chain},
                    {"seed", r.seed},
                    {"resolution", r.resolution},
                    {"psnr_db", r.psnr_db},
                    {"ssim", r.ssim},
                    {"ber_percent", r.ber_percent}});
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : report.aggregates) {
    aggs.push_back({{"chain", a.chain},
                    {"count", a.count},
                    {"psnr_db", stat_json(a.psnr_db)},
                    {"ssim", stat_json(a.ssim)},
                    {"ber_percent", stat_json(a.ber_percent)}});
  }
  return {{"rows", rows}, {"aggregates", aggs}, {"metadata", report.metadata}};
}

void write_csv(std::ostream& out, const EvalReport& report) {
  out << "image,chain,seed,resolution,psnr_db,ssim,ber_percent\n";
  char buf[128];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", r.psnr_db, r.ssim, r.ber_percent);
    out << r.image << ',' << r.chain << ',' << r.seed << ',' << r.resolution << buf;
  }
}

EvalReport run_codec_comparison(const RunConfig& cfg, const std::vector<Image>& holdout,
                             const std::map<std::string, train::Codec>& codecs) {
  if (holdout.empty()) throw ConfigError("evaluation needs held-out images");
  if (codecs.empty()) throw ConfigError("evaluation needs at least one codec");
  if (cfg.oracle_pipeline.ops.empty()) throw ConfigError("evaluation needs an oracle pipeline");
  const SeedTree tree = SeedTree(cfg.seed).child("evaluation");
  auto covers = stack(holdout);
  const auto n = covers.size(0);

  EvalReport report;
  torch::NoGradGuard guard;
  for (const auto& [chain, codec] : codecs) {
    auto& enc = const_cast<watermark::EncoderNet&>(codec.encoder);
    auto& dec = const_cast<watermark::DecoderNet&>(codec.decoder);
    const int length = enc->options().message_length;
    for (int t = 0; t < cfg.eval_trials; ++t) {
      auto bits = torch::bernoulli(torch::full({n, length}, 0.5),
                                   tree.generator(streams::kMessages, t));
      auto marked = enc->forward(covers, bits);
      const auto oracle_seed = tree.derive("oracle", t);
      auto captured = simnoise::apply_T(marked, cfg.oracle_pipeline, oracle_seed);
      auto decoded = watermark::hard_bits(torch::sigmoid(dec->forward(captured)));
      for (int64_t i = 0; i < n; ++i) {
        EvalRow row;
        row.image = "holdout_" + std::to_string(i);
        row.chain = chain;
        row.seed = oracle_seed;
        row.resolution = static_cast<int>(covers.size(2));
        row.psnr_db = psnr(covers[i], marked[i]);
        row.ssim = ssim(covers[i], marked[i]);
        row.ber_percent =
            100.0 * (decoded[i].to(torch::kFloat32) != bits[i]).to(torch::kFloat64).mean().item<double>();
        report.rows.push_back(row);
      }
    }
  }
  report.aggregates = aggregate(report.rows);
  report.metadata = {{"config_hash", config_hash(cfg)},
                     {"seed", cfg.seed},
                     {"trials", cfg.eval_trials},
                     {"holdout", n},
                     {"oracle", nlohmann::json(cfg.oracle_pipeline)}};
  return report;
}

EvalReport run_codec_comparison(const RunConfig& cfg) {
  if (cfg.codec_checkpoints.empty()) throw ConfigError("config lists no codec_checkpoints");
  std::map<std::string, train::Codec> codecs;
  nlohmann::json ids;
  for (const auto& [chain, dir] : cfg.codec_checkpoints) {
    if (!std::filesystem::exists(std::filesystem::path(dir) / "meta.json")) {
      throw ConfigError("missing checkpoint for chain " + chain + ": " + dir);
    }
    codecs.emplace(chain, train::load_codec(dir));
    ids[chain] = dir;
  }
  const std::string dir = cfg.eval_dir.empty() ? cfg.sharp_dir : cfg.eval_dir;
  auto holdout = load_image_dir(dir, cfg.train_resolution);
  auto report = run_codec_comparison(cfg, holdout, codecs);
  report.metadata["checkpoints"] = ids;
  return report;
}

std::map<std::string, double> mean_ber(const EvalReport& report) {
  std::map<std::string, double> out;
  for (const auto& a : report.aggregates) out[a.chain] = a.ber_percent.mean;
  return out;
}

}  // namespace s2r::eval
