#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "s2r/core/config.hpp"
#include "s2r/core/dataset.hpp"
#include "s2r/losses/losses.hpp"
#include "s2r/translator/discriminator.hpp"
#include "s2r/translator/generator.hpp"
#include "s2r/watermark/codec.hpp"

namespace s2r::train {

struct S2RLossRecord {
  std::int64_t step = 0;
  double total_G = 0, adv_G = 0, perc = 0, total_D = 0, gp = 0;
};

struct WatermarkLossRecord {
  std::int64_t step = 0;
  double total = 0, message = 0, image = 0, ber = 0;
};

struct SupervisedLossRecord {
  std::int64_t step = 0;
  double total = 0, perc = 0, l1 = 0;
};

struct TrainOptions {
  /// Checkpoints, loss CSV and config snapshot go here; empty keeps
  /// everything in memory.
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> resume_from;
  /// Overrides the configured step budget when set.
  std::optional<std::int64_t> steps;
  bool verbose = false;
};

/// Generator/discriminator pair with its optimizers and the frozen feature
/// extractor. Networks are initialized from the config's "init" substream.
struct S2RState {
  explicit S2RState(const RunConfig& cfg);

  translator::GeneratorNet G;
  translator::DiscriminatorNet D;
  losses::PerceptualExtractor phi;
  torch::optim::Adam opt_G;
  torch::optim::Adam opt_D;
  std::int64_t step = 0;
};

struct S2RResult {
  std::shared_ptr<S2RState> state;
  std::vector<S2RLossRecord> history;
  std::filesystem::path checkpoint;  // final checkpoint (empty without output_dir)
};

/// One alternating update: D on total_D (objective + gradient penalty on
/// real/fake interpolates), then G on total_G (non-saturating adversarial +
/// multi-scale perceptual loss against the y^c pyramid). Throws NumericError
/// when a loss is non-finite or exceeds 1e4 in magnitude; parameters are left
/// untouched in that case.
S2RLossRecord s2r_step(S2RState& state, const RunConfig& cfg, const torch::Tensor& sharp,
                       const torch::Tensor& real, std::int64_t step);

/// Phase A: unpaired training of the translator G over T's outputs.
S2RResult train_s2r(const UnpairedDataset& data, const RunConfig& cfg,
                    const TrainOptions& opts = {});

/// Supervised ablation: G trained on index-aligned (y^c, y^u) pairs with
/// perceptual + L1 losses, no discriminator. Same checkpoint format as
/// train_s2r. Throws ConfigError when the sets differ in length.
struct SupervisedResult {
  translator::GeneratorNet G{nullptr};
  std::vector<SupervisedLossRecord> history;
  std::filesystem::path checkpoint;
};
SupervisedResult train_s2r_supervised(const std::vector<Image>& simulated,
                                      const std::vector<Image>& real, const RunConfig& cfg,
                                      const TrainOptions& opts = {});

/// Builds a generator from a checkpoint and freezes it.
translator::GeneratorNet load_generator(const std::filesystem::path& dir);

enum class ChainKind { identity, T, TG };
ChainKind parse_chain(const std::string& name);
std::string chain_name(ChainKind kind);

/// Noise layer between encoder and decoder: identity, T, or T followed by a
/// frozen translator. Draws a fresh T seed and fresh latent code per step.
class NoiseChain {
 public:
  NoiseChain(ChainKind kind, NoisePipelineConfig pipeline, std::uint64_t seed,
             translator::GeneratorNet generator = nullptr);

  torch::Tensor apply(const torch::Tensor& x, std::int64_t step) const;
  ChainKind kind() const { return kind_; }
  const translator::GeneratorNet& generator() const { return generator_; }

 private:
  ChainKind kind_;
  NoisePipelineConfig pipeline_;
  std::uint64_t seed_;
  translator::GeneratorNet generator_;
};

struct Codec {
  watermark::EncoderNet encoder{nullptr};
  watermark::DecoderNet decoder{nullptr};
};

struct WatermarkResult {
  Codec codec;
  std::vector<WatermarkLossRecord> history;
  std::filesystem::path checkpoint;
};

/// Phase B: trains the codec through `chain`; the chain's translator is
/// never written to.
WatermarkResult train_watermark(const std::vector<Image>& covers, const NoiseChain& chain,
                                const RunConfig& cfg, const TrainOptions& opts = {});

Codec load_codec(const std::filesystem::path& dir);

void write_csv_header(std::ostream& out, const S2RLossRecord*);
void write_csv_row(std::ostream& out, const S2RLossRecord& r);
void write_csv_header(std::ostream& out, const WatermarkLossRecord*);
void write_csv_row(std::ostream& out, const WatermarkLossRecord& r);
void write_csv_header(std::ostream& out, const SupervisedLossRecord*);
void write_csv_row(std::ostream& out, const SupervisedLossRecord& r);

}  // namespace s2r::train
