#include <gtest/gtest.h>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/watermark/codec.hpp"
#include "support/fixtures.hpp"

using namespace s2r;
using namespace s2r::watermark;
using s2r::testing::gen;

namespace {

CodecOptions options(bool dense = false) {
  CodecOptions o;
  o.message_length = 8;
  o.channels = 8;
  o.blocks = 2;
  o.resolution = 16;
  o.dense = dense;
  return o;
}

void perturb(torch::nn::Module& m, double scale, std::uint64_t seed) {
  torch::NoGradGuard guard;
  auto g = gen(seed);
  for (auto& p : m.parameters()) p.add_(torch::randn(p.sizes(), g) * scale);
}

WatermarkMessage msg8() { return WatermarkMessage::from_bitstring("10110010"); }

}  // namespace

TEST(Encoder, UntrainedIsIdentity) {
  for (bool dense : {false, true}) {
    EncoderNet enc(options(dense));
    Image cover(torch::rand({3, 16, 16}, gen(1)) * 2 - 1);
    auto marked = encode(cover, msg8(), enc);
    EXPECT_LT((marked.tensor() - cover.tensor()).abs().max().item<double>(), 1e-6);
  }
}

TEST(Encoder, BoundedOnExtremeCovers) {
  EncoderNet enc(options());
  perturb(*enc, 0.5, 2);
  auto cover = torch::where(torch::rand({2, 3, 16, 16}, gen(3)) > 0.5, 1.0, -1.0).to(torch::kFloat32);
  auto out = enc->forward(cover, torch::ones({2, 8}));
  EXPECT_LE(out.abs().max().item<double>(), 1.0);
  EXPECT_EQ(out.sizes(), cover.sizes());
}

TEST(Encoder, ShapeErrors) {
  EncoderNet enc(options());
  EXPECT_THROW(enc->forward(torch::zeros({1, 3, 32, 32}), torch::zeros({1, 8})), ShapeError);
  EXPECT_THROW(enc->forward(torch::zeros({1, 3, 16, 16}), torch::zeros({1, 7})), ShapeError);
  Image cover(torch::zeros({3, 16, 16}));
  EXPECT_THROW(encode(cover, WatermarkMessage::from_bitstring("101"), enc), ShapeError);
}

TEST(Encoder, DifferentiableInCoverAndParams) {
  EncoderNet enc(options(true));
  perturb(*enc, 0.05, 4);
  auto cover = (torch::rand({1, 3, 16, 16}, gen(5)) - 0.5).requires_grad_(true);
  enc->forward(cover, torch::ones({1, 8})).sum().backward();
  EXPECT_GT(cover.grad().norm().item<double>(), 0.0);
  for (auto& p : enc->parameters()) {
    ASSERT_TRUE(p.grad().defined());
  }
}

TEST(Decoder, ScoreLengthAndTieRule) {
  for (bool dense : {false, true}) {
    DecoderNet dec(options(dense));
    Image img(torch::rand({3, 16, 16}, gen(6)) * 2 - 1);
    auto d = decode(img, dec);
    EXPECT_EQ(d.scores.size(), 8u);
    EXPECT_EQ(d.message.size(), 8u);
    for (auto s : d.scores) {
      EXPECT_GE(s, 0.0f);
      EXPECT_LE(s, 1.0f);
    }
  }
  EXPECT_EQ(to_message(std::vector<float>(8, 0.5f)), WatermarkMessage(std::vector<std::uint8_t>(8, 0)));
  auto hb = hard_bits(torch::tensor({0.5f, 0.5001f, 0.2f, 0.9f}));
  EXPECT_TRUE(torch::equal(hb.to(torch::kFloat32), torch::tensor({0.0f, 1.0f, 0.0f, 1.0f})));
}

TEST(ResolutionScaling, NativeMatchesDirectEncode) {
  EncoderNet enc(options());
  perturb(*enc, 0.05, 7);
  torch::NoGradGuard guard;
  for (int i = 0; i < 5; ++i) {
    auto u8 = torch::randint(0, 256, {16, 16, 3}, gen(10 + i), torch::kUInt8);
    auto scaled = resolution_scale_embed(u8, msg8(), enc);
    Image cover(normalize(u8.permute({2, 0, 1})));
    auto direct = denormalize(encode(cover, msg8(), enc).tensor()).permute({1, 2, 0});
    EXPECT_TRUE(torch::equal(scaled, direct));
  }
}

TEST(ResolutionScaling, ZeroResidualKeepsImage) {
  EncoderNet enc(options());
  torch::NoGradGuard guard;
  for (auto [h, w] : std::vector<std::pair<int, int>>{{16, 16}, {31, 47}, {100, 64}, {9, 200}}) {
    auto u8 = torch::randint(0, 256, {h, w, 3}, gen(h * w), torch::kUInt8);
    auto out = resolution_scale_embed(u8, msg8(), enc);
    EXPECT_EQ(out.sizes(), u8.sizes());
    EXPECT_LE((out.to(torch::kInt32) - u8.to(torch::kInt32)).abs().max().item<int>(), 1);
  }
}

TEST(ResolutionScaling, ResidualIsLinearInScale) {
  auto o = options();
  torch::manual_seed(20);
  EncoderNet a(o);
  perturb(*a, 0.05, 21);
  o.residual_scale = 0.37;
  EncoderNet b(o);
  torch::NoGradGuard guard;
  auto pa = a->named_parameters(), pb = b->named_parameters();
  for (auto& kv : pa) pb[kv.key()].copy_(kv.value());
  auto img = torch::rand({3, 40, 24}, gen(22)) * 1.6 - 0.8;  // away from the clamp
  auto ra = upscaled_residual(img, msg8(), a);
  auto rb = upscaled_residual(img, msg8(), b);
  EXPECT_LT((rb - 0.37 * ra).abs().max().item<double>(), 1e-6);
}
