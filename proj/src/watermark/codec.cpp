#include "s2r/watermark/codec.hpp"

#include <numeric>

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"
#include "s2r/translator/generator.hpp"

namespace s2r::watermark {
namespace {

namespace nn = torch::nn;

constexpr int kMessagePlanes = 8;

nn::Conv2d conv(int in, int out, int kernel, int stride = 1) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2));
}

void check_native(const torch::Tensor& x, const CodecOptions& o) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != o.resolution || x.size(3) != o.resolution) {
    throw ShapeError("codec works at its native " + std::to_string(o.resolution) + "x" +
                     std::to_string(o.resolution) +
                     " resolution; use resolution_scale_embed for other sizes");
  }
}

}  // namespace

CodecOptions CodecOptions::from(const RunConfig& cfg) {
  CodecOptions o;
  o.message_length = cfg.message_length;
  o.channels = cfg.codec.channels;
  o.blocks = cfg.codec.blocks;
  o.dense = cfg.codec.layout == "dense";
  o.resolution = cfg.train_resolution;
  return o;
}

EncoderNetImpl::EncoderNetImpl(const CodecOptions& opts) : opts_(opts) {
  const int c = opts.channels;
  if (opts.resolution % 8 != 0) throw ConfigError("codec resolution must be a multiple of 8");
  const int s = opts.resolution / 8;
  features_ = register_module("features", conv(3, c, 3));
  int planes = opts.message_length;
  if (opts.dense) {
    planes = kMessagePlanes;
    message_ = register_module("message", nn::Linear(opts.message_length, planes * s * s));
  }
  join_ = register_module("join", conv(c + planes + 3, c, 3));
  blocks_ = register_module("blocks", nn::Sequential());
  for (int b = 0; b < opts.blocks; ++b) blocks_->push_back(translator::ResBlock(c));
  head_ = register_module("head", conv(c, 3, 1));
  torch::NoGradGuard guard;
  head_->weight.zero_();
  head_->bias.zero_();
}

torch::Tensor EncoderNetImpl::residual(const torch::Tensor& cover, const torch::Tensor& bits) {
  check_native(cover, opts_);
  if (bits.dim() != 2 || bits.size(0) != cover.size(0) || bits.size(1) != opts_.message_length) {
    throw ShapeError("message batch must be (N, " + std::to_string(opts_.message_length) + ")");
  }
  const auto n = cover.size(0), h = cover.size(2), w = cover.size(3);
  const int64_t s = opts_.resolution / 8;
  auto signs = bits.to(cover.options()) * 2.0 - 1.0;
  auto plane = opts_.dense
                   ? resize(torch::relu(message_(signs)).view({n, kMessagePlanes, s, s}), h, w)
                   : signs.view({n, -1, 1, 1}).expand({n, -1, h, w});
  auto f = torch::relu(features_(cover));
  auto hdn = torch::relu(join_(torch::cat({f, plane, cover}, 1)));
  if (!blocks_->is_empty()) hdn = blocks_->forward(hdn);
  return opts_.residual_scale * head_(torch::relu(hdn));
}

torch::Tensor EncoderNetImpl::forward(const torch::Tensor& cover, const torch::Tensor& bits) {
  return (cover + residual(cover, bits)).clamp(-1.0, 1.0);
}

DecoderNetImpl::DecoderNetImpl(const CodecOptions& opts) : opts_(opts) {
  const int c = opts.channels;
  // Group norm lets the decoder see the faint residual of an untrained
  // encoder; without it training stalls at chance.
  auto gn = [](int ch) { return nn::GroupNorm(nn::GroupNormOptions(std::gcd(4, ch), ch)); };
  body_ = register_module(
      "body", nn::Sequential(conv(3, c, 3), gn(c), nn::ReLU(), conv(c, c, 3, 2), gn(c), nn::ReLU(),
                             conv(c, 2 * c, 3, 2), gn(2 * c), nn::ReLU(), conv(2 * c, 2 * c, 3, 2),
                             gn(2 * c), nn::ReLU()));
  const int s = opts.resolution / 8;
  head_ = register_module("head", nn::Linear(opts.dense ? 2 * c * s * s : 2 * c, opts.message_length));
}

torch::Tensor DecoderNetImpl::forward(const torch::Tensor& img) {
  check_native(img, opts_);
  auto f = body_->forward(img);
  auto h = opts_.dense ? f.flatten(1) : f.mean({2, 3});
  return head_(h);
}

Image encode(const Image& cover, const WatermarkMessage& msg, EncoderNet& net) {
  if (static_cast<int>(msg.size()) != net->options().message_length) {
    throw ShapeError("message has " + std::to_string(msg.size()) + " bits, codec expects " +
                     std::to_string(net->options().message_length));
  }
  torch::NoGradGuard guard;
  auto out = net->forward(cover.batch(), msg.to_tensor().unsqueeze(0));
  return Image(out.squeeze(0));
}

torch::Tensor hard_bits(const torch::Tensor& scores) { return (scores > 0.5).to(torch::kUInt8); }

WatermarkMessage to_message(const std::vector<float>& scores) {
  std::vector<std::uint8_t> bits(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) bits[i] = scores[i] > 0.5f ? 1 : 0;
  return WatermarkMessage(std::move(bits));
}

Decoded decode(const Image& img, DecoderNet& net) {
  torch::NoGradGuard guard;
  auto scores = torch::sigmoid(net->forward(img.batch())).squeeze(0).contiguous();
  Decoded d;
  d.scores.assign(scores.data_ptr<float>(), scores.data_ptr<float>() + scores.numel());
  d.message = to_message(d.scores);
  return d;
}

torch::Tensor upscaled_residual(const torch::Tensor& image, const WatermarkMessage& msg,
                                EncoderNet& enc) {
  const auto h = image.size(1), w = image.size(2);
  const int native = enc->options().resolution;
  torch::NoGradGuard guard;
  auto small = resize(image, native, native).unsqueeze(0);
  auto bits = msg.to_tensor().unsqueeze(0);
  auto r_small = enc->forward(small, bits) - small;
  return resize(r_small.squeeze(0), h, w);
}

torch::Tensor resolution_scale_embed(const torch::Tensor& image_u8, const WatermarkMessage& msg,
                                     EncoderNet& enc) {
  if (image_u8.dim() != 3 || image_u8.size(2) != 3) {
    throw ShapeError("resolution_scale_embed expects an (H, W, 3) image");
  }
  auto x = normalize(image_u8.permute({2, 0, 1}));
  auto r = upscaled_residual(x, msg, enc);
  auto xw = (x + r).clamp(-1.0, 1.0);
  return denormalize(xw).permute({1, 2, 0}).contiguous();
}

}  // namespace s2r::watermark
