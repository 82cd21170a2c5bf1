#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "s2r/core/config.hpp"
#include "s2r/core/image.hpp"
#include "s2r/train/trainers.hpp"

namespace s2r::eval {

struct EvalRow {
  std::string image;
  std::string chain;
  std::uint64_t seed = 0;
  int resolution = 0;
  double psnr_db = 0;
  double ssim = 0;
  double ber_percent = 0;
};

struct Stat {
  double mean = 0;
  double std = 0;  // population standard deviation
};

struct ChainAggregate {
  std::string chain;
  std::size_t count = 0;
  Stat psnr_db, ssim, ber_percent;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<ChainAggregate> aggregates;
  nlohmann::json metadata;
};

/// Per-chain aggregates in order of first appearance.
std::vector<ChainAggregate> aggregate(const std::vector<EvalRow>& rows);

nlohmann::json to_json(const EvalReport& report);
void write_csv(std::ostream& out, const EvalReport& report);

/// Evaluates each codec on held-out covers: embed a random message, push
/// the watermarked image through the hidden oracle channel, decode. Every
/// codec sees the same messages and oracle draws. Rows are tagged with the
/// chain name the codec was trained under.
EvalReport run_codec_comparison(const RunConfig& cfg, const std::vector<Image>& holdout,
                             const std::map<std::string, train::Codec>& codecs);

/// Loads cfg.eval_dir and every checkpoint in cfg.codec_checkpoints. Throws
/// ConfigError when one is missing.
EvalReport run_codec_comparison(const RunConfig& cfg);

/// Mean BER per chain, convenience for ordering checks.
std::map<std::string, double> mean_ber(const EvalReport& report);

}  // namespace s2r::eval
