#include <gtest/gtest.h>

#include <cmath>

#include "s2r/core/error.hpp"
#include "s2r/translator/discriminator.hpp"
#include "s2r/translator/generator.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace s2r;
using namespace s2r::translator;
using s2r::testing::gen;

namespace {

GeneratorOptions small_options(int k = 3) {
  GeneratorOptions o;
  o.scales_k = k;
  o.base_channels = 4;
  o.latent_dim = 3;
  return o;
}

torch::Tensor images(std::uint64_t seed, int64_t n, int64_t size) {
  return torch::rand({n, 3, size, size}, gen(seed)) * 2 - 1;
}

}  // namespace

TEST(Generator, ScaleSchedule) {
  torch::manual_seed(0);
  GeneratorNet G(small_options());
  auto z = LatentCode::sample(2, 3, gen(1)).z;
  auto outs = G->forward(images(2, 2, 32), z);
  ASSERT_EQ(outs.size(), 3u);
  EXPECT_EQ(outs[0].sizes(), (std::vector<int64_t>{2, 3, 8, 8}));
  EXPECT_EQ(outs[1].sizes(), (std::vector<int64_t>{2, 3, 16, 16}));
  EXPECT_EQ(outs[2].sizes(), (std::vector<int64_t>{2, 3, 32, 32}));
  auto pyr = G->pyramid(images(2, 2, 32));
  ASSERT_EQ(pyr.size(), 3u);
  EXPECT_EQ(pyr[0].size(2), 8);
}

TEST(Generator, ShapeContractOverRandomSizes) {
  for (int k : {1, 2, 3, 4}) {
    torch::manual_seed(k);
    GeneratorNet G(small_options(k));
    const int unit = 1 << (k - 1);
    for (int m : {1, 2, 3, 5}) {
      const int h = unit * m * (k == 1 ? 8 : 1), w = unit * (m + 1) * (k == 1 ? 8 : 1);
      auto x = torch::rand({1, 3, h, w}) * 2 - 1;
      auto outs = G->forward(x, LatentCode::zeros(1, 3).z);
      ASSERT_EQ(static_cast<int>(outs.size()), k);
      for (int i = 0; i < k; ++i) {
        EXPECT_EQ(outs[i].size(2), h >> (k - 1 - i));
        EXPECT_EQ(outs[i].size(3), w >> (k - 1 - i));
        EXPECT_LE(outs[i].abs().max().item<double>(), 1.0);
      }
    }
  }
}

TEST(Generator, RejectsBadShapes) {
  GeneratorNet G(small_options());
  EXPECT_THROW(G->forward(images(3, 1, 30), LatentCode::zeros(1, 3).z), ShapeError);
  EXPECT_THROW(G->forward(images(3, 1, 32), LatentCode::zeros(2, 3).z), ShapeError);
  EXPECT_THROW(G->forward(images(3, 1, 32), LatentCode::zeros(1, 5).z), ShapeError);
}

TEST(Generator, StartsNearIdentityAndStaysBounded) {
  torch::manual_seed(4);
  GeneratorNet G(small_options());
  auto x = images(5, 2, 16) * 0.9;
  auto y = G->translate(x, LatentCode::sample(2, 3, gen(6)).z);
  EXPECT_LT((y - x).abs().max().item<double>(), 0.05);
  auto extreme = torch::ones({1, 3, 16, 16});
  auto ye = G->translate(extreme, LatentCode::sample(1, 3, gen(7)).z * 100);
  EXPECT_LE(ye.abs().max().item<double>(), 1.0);
}

TEST(Generator, LatentReachesOutput) {
  auto opts = small_options();
  opts.head_init_std = 0.1;
  torch::manual_seed(8);
  GeneratorNet G(opts);
  auto x = images(9, 2, 16) * 0.5;
  auto a = G->translate(x, LatentCode::sample(2, 3, gen(10)).z);
  auto b = G->translate(x, LatentCode::zeros(2, 3).z);
  EXPECT_GT((a - b).abs().mean().item<double>(), 0.0);
}

TEST(Generator, NoiseMapOption) {
  auto opts = small_options();
  opts.noise_map = true;
  opts.head_init_std = 0.1;
  torch::manual_seed(11);
  GeneratorNet G(opts);
  auto x = images(12, 1, 16) * 0.5;
  auto z = LatentCode::zeros(1, 3).z;
  auto a = G->translate(x, z, gen(1));
  auto b = G->translate(x, z, gen(2));
  EXPECT_GT((a - b).abs().mean().item<double>(), 0.0);
  EXPECT_TRUE(torch::equal(a, G->translate(x, z, gen(1))));
}

TEST(Generator, EveryBranchUpdatesAfterOneStep) {
  torch::manual_seed(13);
  GeneratorNet G(small_options());
  std::map<std::string, std::vector<torch::Tensor>> before;
  for (auto& [name, m] : G->branches()) {
    for (auto& p : m->parameters()) before[name].push_back(p.detach().clone());
  }
  torch::optim::Adam opt(G->parameters(), torch::optim::AdamOptions(1e-3));
  auto x = images(14, 2, 16) * 0.8;
  auto outs = G->forward(x, LatentCode::sample(2, 3, gen(15)).z);
  torch::Tensor loss = torch::zeros({});
  for (auto& o : outs) loss = loss + (o - 0.3).pow(2).mean();
  loss.backward();
  opt.step();
  ASSERT_FALSE(before.empty());
  for (auto& [name, m] : G->branches()) {
    double moved = 0;
    auto params = m->parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      moved += (params[i] - before[name][i]).norm().item<double>();
    }
    EXPECT_GT(moved, 0.0) << "branch " << name << " did not update";
  }
}

TEST(Generator, GradientsMatchFiniteDifferences) {
  auto opts = small_options();
  opts.head_init_std = 0.05;
  torch::manual_seed(16);
  GeneratorNet G(opts);
  G->to(torch::kFloat64);
  auto z = torch::randn({1, 3}, gen(17), torch::kFloat64);
  auto x = torch::rand({1, 3, 4, 4}, gen(18), torch::kFloat64) - 0.5;
  const double err = s2r::testing::gradient_error(
      [&](const torch::Tensor& t) { return G->translate(t, z); }, x);
  EXPECT_LT(err, 1e-2);
}

TEST(Discriminator, ShapesPurityAndScale) {
  torch::manual_seed(19);
  DiscriminatorNet D(DiscriminatorOptions{8, 32});
  auto x = images(20, 3, 32);
  auto a = D->forward(x);
  EXPECT_EQ(a.dim(), 4);
  EXPECT_EQ(a.size(1), 1);
  EXPECT_GE(a.size(2), 1);
  EXPECT_TRUE(torch::equal(a, D->forward(x)));
  EXPECT_LT(D->critic(x).abs().max().item<double>(), 10.0);
  EXPECT_EQ(D->critic(x).sizes(), (std::vector<int64_t>{3}));
  EXPECT_THROW(D->forward(images(21, 1, 16)), ShapeError);
}

TEST(Discriminator, WorksAtSmallResolutions) {
  for (int r : {16, 32, 128}) {
    DiscriminatorNet D(DiscriminatorOptions{4, r});
    auto out = D->forward(images(22, 1, r));
    EXPECT_GE(out.size(2), 1) << r;
    EXPECT_TRUE(torch::isfinite(out).all().item<bool>());
  }
}

TEST(Interpolate, Endpoints) {
  auto real = torch::ones({2, 3, 4, 4});
  auto fake = -torch::ones({2, 3, 4, 4});
  EXPECT_TRUE(torch::equal(interpolate_samples(real, fake, torch::ones({2})), real));
  EXPECT_TRUE(torch::equal(interpolate_samples(real, fake, torch::zeros({2})), fake));
  EXPECT_TRUE(torch::equal(interpolate_samples(real, fake, torch::full({2}, 0.5)), torch::zeros_like(real)));
}
