#include <gtest/gtest.h>

#include <cmath>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/losses/losses.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace s2r;
using namespace s2r::losses;
using s2r::testing::gen;

TEST(Adversarial, ZeroLogits) {
  auto zero = torch::zeros({4, 1, 3, 3});
  EXPECT_NEAR(adv_loss(zero, zero, Side::generator).item<double>(), std::log(2.0), 1e-7);
  EXPECT_NEAR(adv_loss(zero, zero, Side::discriminator).item<double>(), 2 * std::log(2.0), 1e-7);
  EXPECT_NEAR(adv_objective(zero, zero).item<double>(), -2 * std::log(2.0), 1e-7);
}

TEST(Adversarial, DiscriminatorIsNegatedObjective) {
  auto g = gen(1);
  auto real = torch::randn({5}, g), fake = torch::randn({5}, g);
  EXPECT_DOUBLE_EQ(adv_loss(real, fake, Side::discriminator).item<double>(),
                   -adv_objective(real, fake).item<double>());
}

TEST(Adversarial, GeneratorLossFallsAsFakeScoresRise) {
  double prev = 1e9;
  for (double s = -5; s <= 5; s += 0.5) {
    const double l = adv_loss(torch::zeros({1}), torch::full({3}, s), Side::generator).item<double>();
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(Adversarial, NonFiniteScoresRaise) {
  auto bad = torch::tensor({1.0f, NAN});
  EXPECT_THROW(adv_loss(bad, torch::zeros({2}), Side::discriminator), NumericError);
  EXPECT_THROW(adv_loss(torch::zeros({2}), bad, Side::generator), NumericError);
}

TEST(GradientPenalty, ClosedForms) {
  auto y = torch::rand({3, 3, 5, 5}, gen(2), torch::kFloat64);
  const double P = 3 * 5 * 5;
  Critic sum = [](const torch::Tensor& t) { return t.sum({1, 2, 3}); };
  EXPECT_NEAR(gradient_penalty(sum, y).item<double>(), std::pow(std::sqrt(P) - 1, 2), 1e-5);
  auto u = torch::randn({3, 5, 5}, gen(3), torch::kFloat64);
  u = u / u.norm();
  Critic unit = [&](const torch::Tensor& t) { return (t * u).sum({1, 2, 3}); };
  EXPECT_NEAR(gradient_penalty(unit, y).item<double>(), 0.0, 1e-5);
  // Score maps are averaged per sample: a map of P copies of sum(y) has the same slope.
  Critic map = [](const torch::Tensor& t) {
    return t.sum({1, 2, 3}, true).expand({t.size(0), 1, 4, 4});
  };
  EXPECT_NEAR(gradient_penalty(map, y).item<double>(), std::pow(std::sqrt(P) - 1, 2), 1e-5);
}

TEST(GradientPenalty, NonNegativeForRandomCritics) {
  for (int i = 0; i < 10; ++i) {
    auto w = torch::randn({3, 4, 4}, gen(10 + i));
    Critic c = [&](const torch::Tensor& t) { return torch::sin((t * w).sum({1, 2, 3})); };
    EXPECT_GE(gradient_penalty(c, torch::rand({2, 3, 4, 4}, gen(30 + i))).item<double>(), 0.0);
  }
}

TEST(GradientPenalty, DetachedCriticRaises) {
  Critic constant = [](const torch::Tensor& t) { return torch::zeros({t.size(0)}); };
  EXPECT_THROW(gradient_penalty(constant, torch::rand({2, 3, 4, 4})), ContractError);
}

TEST(GradientPenalty, FlowsIntoCriticParameters) {
  auto w = torch::randn({3, 4, 4}, gen(4)).requires_grad_(true);
  Critic c = [&](const torch::Tensor& t) { return torch::tanh((t * w).sum({1, 2, 3})); };
  gradient_penalty(c, torch::rand({2, 3, 4, 4}, gen(5))).backward();
  ASSERT_TRUE(w.grad().defined());
  EXPECT_GT(w.grad().norm().item<double>(), 0.0);
}

TEST(Perceptual, ZeroOnIdenticalAndOuterWeight) {
  PerceptualExtractor phi(4, 1);
  auto x = torch::rand({2, 3, 16, 16}, gen(6)) * 2 - 1;
  std::vector<torch::Tensor> pyr{resize(x, 4, 4), resize(x, 8, 8), x};
  EXPECT_EQ(perceptual_multiscale(pyr, pyr, phi, 3).item<double>(), 0.0);

  auto t = torch::rand({2, 3, 16, 16}, gen(7)) * 2 - 1;
  std::vector<torch::Tensor> one{x}, tgt{t};
  const double raw = (phi->forward(x) - phi->forward(t)).abs().mean().item<double>();
  EXPECT_NEAR(perceptual_multiscale(one, tgt, phi, 1).item<double>(), raw, 1e-6);
  // k = 3 weights the same sum by 1/4.
  std::vector<torch::Tensor> three{x, x, x}, three_t{t, t, t};
  EXPECT_NEAR(perceptual_multiscale(three, three_t, phi, 3).item<double>(), 3 * raw / 4, 1e-6);
}

TEST(Perceptual, PositiveOnPerturbationAndErrors) {
  PerceptualExtractor phi(4, 2);
  auto x = torch::rand({1, 3, 8, 8}, gen(8)) * 2 - 1;
  for (int i = 0; i < 5; ++i) {
    auto y = x + torch::randn({1, 3, 8, 8}, gen(40 + i)) * 0.01;
    EXPECT_GT(perceptual_multiscale({y}, {x}, phi, 1).item<double>(), 0.0);
  }
  EXPECT_THROW(perceptual_multiscale({x}, {x, x}, phi, 2), ShapeError);
  EXPECT_THROW(perceptual_multiscale({x}, {resize(x, 4, 4)}, phi, 1), ShapeError);
}

TEST(Perceptual, ExtractorIsFrozenAndSeeded) {
  PerceptualExtractor a(4, 3), b(4, 3), c(4, 4);
  for (auto& p : a->parameters()) EXPECT_FALSE(p.requires_grad());
  auto x = torch::rand({1, 3, 8, 8}, gen(9));
  EXPECT_TRUE(torch::equal(a->forward(x), b->forward(x)));
  EXPECT_FALSE(torch::equal(a->forward(x), c->forward(x)));
}

TEST(Perceptual, ScaleHomogeneity) {
  // With a single scale whose feature difference is doubled, the term doubles.
  // phi is positively homogeneous (bias-free ReLU convs), so doubling both
  // images doubles the feature difference.
  PerceptualExtractor phi(4, 5);
  auto x = torch::rand({1, 3, 8, 8}, gen(10)) - 0.5;
  auto t = torch::rand({1, 3, 8, 8}, gen(11)) - 0.5;
  const double base = perceptual_multiscale({x}, {t}, phi, 1).item<double>();
  const double twice = perceptual_multiscale({x * 2}, {t * 2}, phi, 1).item<double>();
  EXPECT_NEAR(twice, 2 * base, 1e-5);
}

TEST(Totals, Examples) {
  LossWeights w;
  EXPECT_NEAR(total_G(0.7, 0.3, w), 1.0, 1e-12);
  EXPECT_NEAR(total_D(0.5, 2.0, w) - total_D(0.5, 0.0, w), 0.01, 1e-12);
  LossWeights nogp = w;
  nogp.lambda_grad = 0;
  EXPECT_DOUBLE_EQ(total_D(0.8, 3.0, nogp), -0.8);
  auto tg = total_G(torch::tensor(0.7), torch::tensor(0.3), w);
  EXPECT_NEAR(tg.item<double>(), 1.0, 1e-6);
}

TEST(Totals, Ramp) {
  EXPECT_EQ(ramp(0, 10, 5), 0.0);
  EXPECT_EQ(ramp(9, 10, 5), 0.0);
  EXPECT_DOUBLE_EQ(ramp(12, 10, 5), 0.4);
  EXPECT_EQ(ramp(15, 10, 5), 1.0);
  EXPECT_EQ(ramp(3, 0, 0), 1.0);
}

TEST(WatermarkLossTerms, Examples) {
  auto logits = torch::zeros({2, 4});
  auto bits = torch::ones({2, 4});
  auto cover = torch::zeros({2, 3, 4, 4});
  auto marked = torch::full({2, 3, 4, 4}, 0.1);
  LossWeights w;
  auto l = watermark_loss(logits, bits, marked, cover, w);
  EXPECT_NEAR(l.message.item<double>(), std::log(2.0), 1e-6);
  EXPECT_NEAR(l.image.item<double>(), 0.01, 1e-7);
  EXPECT_NEAR(l.total.item<double>(), std::log(2.0) + 0.7 * 0.01, 1e-6);
}

TEST(Gradients, LossesMatchFiniteDifferences) {
  auto x = torch::rand({2, 3, 4, 4}, gen(12), torch::kFloat64) - 0.5;
  auto target = torch::rand({2, 3, 4, 4}, gen(13), torch::kFloat64) - 0.5;
  PerceptualExtractor phi(4, 6);
  phi->to(torch::kFloat64);
  EXPECT_LT(s2r::testing::gradient_error(
                [](const torch::Tensor& t) {
                  return adv_loss(t.flatten(1).mean(1), t.flatten(1).mean(1), Side::generator);
                },
                x),
            1e-2);
  EXPECT_LT(s2r::testing::gradient_error(
                [&](const torch::Tensor& t) {
                  return perceptual_multiscale({resize(t, 2, 2), t}, {resize(target, 2, 2), target},
                                               phi, 2);
                },
                x),
            1e-2);
  auto bits = torch::bernoulli(torch::full({2, 48}, 0.5, torch::kFloat64), gen(14));
  EXPECT_LT(s2r::testing::gradient_error(
                [&](const torch::Tensor& t) {
                  return watermark_loss(t.flatten(1), bits, t, target, LossWeights{}).total;
                },
                x),
            1e-2);
}
