#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "s2r/core/dataset.hpp"
#include "s2r/core/error.hpp"
#include "s2r/eval/metrics.hpp"
#include "s2r/eval/plot.hpp"
#include "s2r/eval/report.hpp"
#include "s2r/train/trainers.hpp"
#include "support/fixtures.hpp"

using namespace s2r;
using namespace s2r::eval;
using s2r::testing::gen;
using s2r::testing::TempDir;
using s2r::testing::tiny_config;

namespace {

Image flat(float v, int res = 16) { return Image(torch::full({3, res, res}, v)); }

}  // namespace

TEST(Psnr, KnownValues) {
  // one 8-bit level everywhere: 20 log10(255)
  EXPECT_NEAR(psnr(flat(0.0f), flat(2.0f / 255.0f)), 20.0 * std::log10(255.0), 1e-4);
  EXPECT_NEAR(psnr(flat(-1.0f), flat(1.0f)), 0.0, 1e-9);
  EXPECT_EQ(psnr(flat(0.3f), flat(0.3f)), kPsnrCap);
  // half the pixels off by 10 levels: MSE 50
  auto a = torch::zeros({3, 4, 4});
  auto b = a.clone();
  b.slice(2, 0, 2).fill_(20.0 / 255.0);
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(255.0 * 255.0 / 50.0), 1e-4);
}

TEST(Psnr, DecreasesWithNoise) {
  auto x = torch::rand({3, 16, 16}, gen(1)) * 2 - 1;
  auto n = torch::randn({3, 16, 16}, gen(2));
  double prev = kPsnrCap;
  for (double s : {0.01, 0.03, 0.1, 0.3}) {
    double p = psnr(x, x + s * n);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(Ssim, IdentitySymmetryAndBounds) {
  auto x = torch::rand({3, 24, 24}, gen(3)) * 2 - 1;
  auto y = (x + 0.2 * torch::randn({3, 24, 24}, gen(4))).clamp(-1, 1);
  EXPECT_NEAR(ssim(x, x), 1.0, 1e-9);
  EXPECT_NEAR(ssim(x, y), ssim(y, x), 1e-9);
  EXPECT_LT(ssim(x, y), 1.0);
  EXPECT_GT(ssim(x, y), -1.0);
  EXPECT_THROW(ssim(torch::zeros({3, 8, 8}), torch::zeros({3, 8, 8})), ShapeError);
}

TEST(Ssim, FallsWithNoise) {
  auto x = torch::rand({3, 24, 24}, gen(5)) * 2 - 1;
  auto n = torch::randn({3, 24, 24}, gen(6));
  double prev = 1.0;
  for (double s : {0.02, 0.1, 0.4}) {
    double v = ssim(x, (x + s * n).clamp(-1, 1));
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Histogram, DisjointFlatSets) {
  auto cmp = hist_compare({flat(-1.0f)}, {flat(1.0f)});
  EXPECT_NEAR(cmp.distance, 2.0 / 256.0, 1e-12);
  EXPECT_NEAR(cmp.a.channels[0][0], 1.0, 1e-12);
  EXPECT_NEAR(cmp.b.channels[2][255], 1.0, 1e-12);
  EXPECT_NEAR(hist_compare({flat(0.2f)}, {flat(0.2f)}).distance, 0.0, 1e-15);
  EXPECT_THROW(hist_compare({}, {flat(0.0f)}), ConfigError);
}

TEST(Histogram, CurvesSumToOne) {
  auto imgs = synthetic_images(5, 16, 7);
  auto h = set_histogram(imgs);
  ASSERT_EQ(h.channels.size(), 3u);
  for (const auto& c : h.channels) {
    double s = 0;
    for (double v : c) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  double s = 0;
  for (double v : h.mean_curve()) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Histogram, MixtureMovesMonotonically) {
  // Replacing members of A by members of B can only shrink the distance.
  auto a = synthetic_images(6, 16, 8);
  std::vector<Image> b;
  for (auto& img : synthetic_images(6, 16, 9)) b.emplace_back((img.tensor() * 0.5f - 0.4f).clamp(-1, 1));
  double prev = hist_compare(a, b).distance;
  for (int k = 1; k <= 6; ++k) {
    auto mix = a;
    for (int i = 0; i < k; ++i) mix[i] = b[i];
    double d = hist_compare(mix, b).distance;
    EXPECT_LE(d, prev + 1e-12);
    prev = d;
  }
  EXPECT_NEAR(prev, 0.0, 1e-12);
}

TEST(Histogram, CsvRows) {
  std::ostringstream out;
  write_histogram_csv(out, hist_compare({flat(-1.0f)}, {flat(1.0f)}));
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "bin,freq_a,freq_b");
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 256);
}

TEST(Report, AggregatesMatchOracle) {
  std::vector<EvalRow> rows;
  std::vector<double> ber_t = {0, 12.5, 25, 6.25};
  for (std::size_t i = 0; i < ber_t.size(); ++i) {
    rows.push_back({"img" + std::to_string(i), "T", 1, 32, 30.0 + i, 0.9, ber_t[i]});
    rows.push_back({"img" + std::to_string(i), "identity", 1, 32, 40.0, 0.95, 50.0});
  }
  auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].chain, "T");
  EXPECT_EQ(agg[0].count, 4u);
  double m = (0 + 12.5 + 25 + 6.25) / 4;
  double v = 0;
  for (double b : ber_t) v += (b - m) * (b - m);
  EXPECT_NEAR(agg[0].ber_percent.mean, m, 1e-9);
  EXPECT_NEAR(agg[0].ber_percent.std, std::sqrt(v / 4), 1e-9);
  EXPECT_NEAR(agg[0].psnr_db.mean, 31.5, 1e-9);
  EXPECT_NEAR(agg[1].ber_percent.std, 0.0, 1e-12);

  EvalReport rep{rows, agg, {{"seed", 1}}};
  auto j = to_json(rep);
  EXPECT_EQ(j["rows"].size(), 8u);
  std::ostringstream csv;
  write_csv(csv, rep);
  EXPECT_NE(csv.str().find("identity"), std::string::npos);
  EXPECT_NEAR(mean_ber(rep).at("T"), m, 1e-9);
}

TEST(Report, ComparisonOnUntrainedCodecs) {
  auto cfg = tiny_config();
  cfg.eval_trials = 2;
  auto holdout = synthetic_images(3, 16, 10);
  train::Codec codec{watermark::EncoderNet(watermark::CodecOptions::from(cfg)),
                     watermark::DecoderNet(watermark::CodecOptions::from(cfg))};
  auto rep = run_codec_comparison(cfg, holdout, {{"T", codec}, {"identity", codec}});
  EXPECT_EQ(rep.rows.size(), 2u * 3u * 2u);
  EXPECT_EQ(rep.metadata["config_hash"], config_hash(cfg));
  // zero residual: marked equals cover
  for (const auto& r : rep.rows) EXPECT_EQ(r.psnr_db, kPsnrCap);
  // same messages and oracle draws for both entries
  auto b = mean_ber(rep);
  EXPECT_DOUBLE_EQ(b.at("T"), b.at("identity"));
  auto again = run_codec_comparison(cfg, holdout, {{"T", codec}, {"identity", codec}});
  EXPECT_EQ(to_json(rep).dump(), to_json(again).dump());
}

TEST(Report, MissingCheckpointIsConfigError) {
  auto cfg = tiny_config();
  TempDir dir("eval");
  std::filesystem::create_directories(dir / "holdout");
  write_png(dir / "holdout" / "a.png",
            torch::randint(0, 256, {16, 16, 3}, gen(11), torch::kUInt8));
  cfg.eval_dir = (dir / "holdout").string();
  cfg.codec_checkpoints = {{"T", (dir / "nope").string()}};
  EXPECT_THROW(run_codec_comparison(cfg), ConfigError);
}

TEST(Plot, ReadsCsvAndWritesPng) {
  TempDir dir("plot");
  {
    std::ofstream out(dir / "loss.csv");
    out << "step,a,b\n";
    for (int i = 0; i < 20; ++i) out << i << ',' << std::sin(i * 0.3) << ',' << i * 0.1 << '\n';
  }
  auto t = read_csv(dir / "loss.csv");
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.columns[0].size(), 20u);
  EXPECT_DOUBLE_EQ(t.columns[2][10], 1.0);
  plot_csv(t, dir / "p.png", {"a"}, "loss");
  auto img = read_image_u8(dir / "p.png");
  ASSERT_TRUE(img.has_value());
  EXPECT_GT(img->size(0), 100);
  EXPECT_THROW(plot_csv(t, dir / "q.png", {"zzz"}), ConfigError);
  EXPECT_ANY_THROW(read_csv(dir / "missing.csv"));
}
