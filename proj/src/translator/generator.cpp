#include "s2r/translator/generator.hpp"

#include "s2r/core/error.hpp"
#include "s2r/core/image.hpp"

namespace s2r::translator {
namespace {

namespace nn = torch::nn;

nn::Conv2d conv(int in, int out, int kernel, int stride = 1) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2));
}

int width_at(const GeneratorOptions& o, int level) { return o.base_channels << level; }

}  // namespace

LatentCode LatentCode::sample(int64_t batch, int dim, torch::Generator gen,
                              const torch::TensorOptions& opts) {
  return {torch::randn({batch, dim}, gen, opts)};
}

LatentCode LatentCode::zeros(int64_t batch, int dim, const torch::TensorOptions& opts) {
  return {torch::zeros({batch, dim}, opts)};
}

GeneratorOptions GeneratorOptions::from(const RunConfig& cfg) {
  GeneratorOptions o;
  o.scales_k = cfg.scales_k;
  o.base_channels = cfg.generator.base_channels;
  o.latent_dim = cfg.generator.latent_dim;
  o.res_blocks = cfg.generator.res_blocks;
  o.noise_map = cfg.generator.noise_map;
  return o;
}

ResBlockImpl::ResBlockImpl(int channels) {
  conv1_ = register_module("conv1", conv(channels, channels, 3));
  conv2_ = register_module("conv2", conv(channels, channels, 3));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  return x + conv2_(torch::relu(conv1_(x)));
}

ShallowConvImpl::ShallowConvImpl(int in_channels, int out_channels) {
  conv1_ = register_module("conv1", conv(in_channels, out_channels, 3));
  conv2_ = register_module("conv2", conv(out_channels, out_channels, 1));
  fuse_ = register_module("fuse", conv(out_channels + in_channels, out_channels, 1));
}

torch::Tensor ShallowConvImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(conv2_(torch::relu(conv1_(x))));
  return torch::relu(fuse_(torch::cat({x, h}, 1)));
}

FeatureAttentionImpl::FeatureAttentionImpl(int channels) {
  merge_ = register_module("merge", conv(channels, channels, 3));
}

torch::Tensor FeatureAttentionImpl::forward(const torch::Tensor& encoder,
                                            const torch::Tensor& shallow) {
  return encoder + merge_(encoder * shallow);
}

FeatureFusionImpl::FeatureFusionImpl(int in_channels, int out_channels) {
  squeeze_ = register_module("squeeze", conv(in_channels, out_channels, 1));
  conv_ = register_module("conv", conv(out_channels, out_channels, 3));
}

torch::Tensor FeatureFusionImpl::forward(const std::vector<torch::Tensor>& features,
                                         int64_t height, int64_t width) {
  std::vector<torch::Tensor> resized;
  resized.reserve(features.size());
  for (const auto& f : features) resized.push_back(resize(f, height, width));
  return conv_(torch::relu(squeeze_(torch::cat(resized, 1))));
}

GeneratorNetImpl::GeneratorNetImpl(const GeneratorOptions& opts) : opts_(opts) {
  if (opts.scales_k < 1) throw ConfigError("generator needs at least one scale");
  const int k = opts.scales_k;
  const int in = input_channels();

  stem_ = register_module("stem", conv(in, width_at(opts, 0), 3));
  encoders_ = register_module("encoders", nn::ModuleList());
  downs_ = register_module("downs", nn::ModuleList());
  shallow_ = register_module("shallow", nn::ModuleList());
  attention_ = register_module("attention", nn::ModuleList());
  fusion_ = register_module("fusion", nn::ModuleList());
  ups_ = register_module("ups", nn::ModuleList());
  merges_ = register_module("merges", nn::ModuleList());
  decoders_ = register_module("decoders", nn::ModuleList());
  heads_ = register_module("heads", nn::ModuleList());

  auto blocks = [&](int ch) {
    nn::Sequential seq;
    for (int b = 0; b < opts.res_blocks; ++b) seq->push_back(ResBlock(ch));
    return seq;
  };

  int total = 0;
  for (int l = 0; l < k; ++l) total += width_at(opts, l);

  for (int l = 0; l < k; ++l) {
    const int ch = width_at(opts, l);
    encoders_->push_back(blocks(ch));
    decoders_->push_back(blocks(ch));
    auto head = conv(ch, 6, 3);
    torch::NoGradGuard guard;
    head->weight.normal_(0.0, opts.head_init_std);
    head->bias.zero_();
    heads_->push_back(head);
    if (l >= 1) {
      downs_->push_back(conv(width_at(opts, l - 1), ch, 3, 2));
      shallow_->push_back(ShallowConv(in, ch));
      attention_->push_back(FeatureAttention(ch));
    }
    if (l < k - 1) {
      fusion_->push_back(FeatureFusion(total, ch));
      ups_->push_back(nn::ConvTranspose2d(
          nn::ConvTranspose2dOptions(width_at(opts, l + 1), ch, 4).stride(2).padding(1)));
      merges_->push_back(conv(2 * ch, ch, 1));
    }
  }
}

int GeneratorNetImpl::input_channels() const {
  return 3 + opts_.latent_dim + (opts_.noise_map ? 1 : 0);
}

std::vector<torch::Tensor> GeneratorNetImpl::pyramid(const torch::Tensor& y_c) const {
  const int k = opts_.scales_k;
  std::vector<torch::Tensor> levels{y_c};  // fine to coarse
  for (int l = 1; l < k; ++l) {
    const auto& prev = levels.back();
    levels.push_back(resize(prev, prev.size(2) / 2, prev.size(3) / 2));
  }
  return {levels.rbegin(), levels.rend()};
}

std::vector<torch::Tensor> GeneratorNetImpl::forward(const torch::Tensor& y_c,
                                                     const torch::Tensor& z,
                                                     torch::optional<torch::Generator> noise_gen) {
  const int k = opts_.scales_k;
  if (y_c.dim() != 4 || y_c.size(1) != 3) {
    throw ShapeError("generator expects an (N, 3, H, W) batch");
  }
  const int64_t multiple = int64_t{1} << (k - 1);
  if (y_c.size(2) % multiple != 0 || y_c.size(3) % multiple != 0) {
    throw ShapeError("generator input " + std::to_string(y_c.size(2)) + "x" +
                     std::to_string(y_c.size(3)) + " must be a multiple of " +
                     std::to_string(multiple) + " (2^(scales_k-1))");
  }
  const int64_t n = y_c.size(0);
  if (z.dim() != 2 || z.size(0) != n || z.size(1) != opts_.latent_dim) {
    throw ShapeError("latent code must be (N, " + std::to_string(opts_.latent_dim) + ")");
  }

  auto coarse_to_fine = pyramid(y_c);
  std::vector<torch::Tensor> inputs(k);  // by level, 0 = finest
  torch::Tensor noise;
  if (opts_.noise_map) {
    noise = noise_gen ? torch::randn({n, 1, y_c.size(2), y_c.size(3)}, *noise_gen, y_c.options())
                      : torch::randn({n, 1, y_c.size(2), y_c.size(3)}, y_c.options());
  }
  for (int l = 0; l < k; ++l) {
    const auto& img = coarse_to_fine[k - 1 - l];
    std::vector<torch::Tensor> parts{img};
    if (opts_.latent_dim > 0) {
      parts.push_back(z.view({n, -1, 1, 1}).expand({n, opts_.latent_dim, img.size(2), img.size(3)}));
    }
    if (opts_.noise_map) parts.push_back(resize(noise, img.size(2), img.size(3)));
    inputs[l] = torch::cat(parts, 1);
  }

  std::vector<torch::Tensor> enc(k);
  enc[0] = encoders_[0]->as<nn::Sequential>()->forward(torch::relu(stem_(inputs[0])));
  for (int l = 1; l < k; ++l) {
    auto down = torch::relu(downs_[l - 1]->as<nn::Conv2d>()->forward(enc[l - 1]));
    auto shallow = shallow_[l - 1]->as<ShallowConv>()->forward(inputs[l]);
    auto fused = attention_[l - 1]->as<FeatureAttention>()->forward(down, shallow);
    enc[l] = encoders_[l]->as<nn::Sequential>()->forward(fused);
  }

  std::vector<torch::Tensor> outputs(k);
  auto emit = [&](int l, const torch::Tensor& feat) {
    auto h = heads_[l]->as<nn::Conv2d>()->forward(feat);
    auto gain = 1.0 + h.narrow(1, 0, 3);
    auto bias = h.narrow(1, 3, 3);
    outputs[k - 1 - l] = (gain * coarse_to_fine[k - 1 - l] + bias).clamp(-1.0, 1.0);
  };

  auto dec = decoders_[k - 1]->as<nn::Sequential>()->forward(enc[k - 1]);
  emit(k - 1, dec);
  for (int l = k - 2; l >= 0; --l) {
    auto up = torch::relu(ups_[l]->as<nn::ConvTranspose2d>()->forward(dec));
    auto aff = fusion_[l]->as<FeatureFusion>()->forward(enc, enc[l].size(2), enc[l].size(3));
    auto merged = merges_[l]->as<nn::Conv2d>()->forward(torch::cat({up, aff}, 1));
    dec = decoders_[l]->as<nn::Sequential>()->forward(merged);
    emit(l, dec);
  }
  return outputs;
}

torch::Tensor GeneratorNetImpl::translate(const torch::Tensor& y_c, const torch::Tensor& z,
                                          torch::optional<torch::Generator> noise_gen) {
  return forward(y_c, z, std::move(noise_gen)).back();
}

std::vector<std::pair<std::string, std::shared_ptr<nn::Module>>> GeneratorNetImpl::branches()
    const {
  std::vector<std::pair<std::string, std::shared_ptr<nn::Module>>> out;
  out.emplace_back("stem", stem_.ptr());
  auto add = [&](const char* name, const nn::ModuleList& list, int offset) {
    for (size_t i = 0; i < list->size(); ++i) {
      out.emplace_back(std::string(name) + std::to_string(i + offset), list->ptr(i));
    }
  };
  add("eb", encoders_, 0);
  add("down", downs_, 1);
  add("scm", shallow_, 1);
  add("fam", attention_, 1);
  add("aff", fusion_, 0);
  add("up", ups_, 0);
  add("merge", merges_, 0);
  add("db", decoders_, 0);
  add("head", heads_, 0);
  return out;
}

}  // namespace s2r::translator
