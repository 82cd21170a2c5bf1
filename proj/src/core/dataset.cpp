#include "s2r/core/dataset.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <set>

#include "s2r/core/error.hpp"
#include "s2r/core/rng.hpp"

namespace fs = std::filesystem;

namespace s2r {

std::optional<torch::Tensor> read_image_u8(const fs::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) return std::nullopt;
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  auto t = torch::from_blob(rgb.data, {rgb.rows, rgb.cols, 3}, torch::kUInt8);
  return t.clone();
}

void write_png(const fs::path& path, const torch::Tensor& image) {
  torch::Tensor hwc;
  if (image.scalar_type() == torch::kUInt8) {
    hwc = image;
  } else {
    if (image.dim() != 3) throw ShapeError("write_png expects a (C, H, W) image");
    hwc = denormalize(image.detach()).permute({1, 2, 0});
  }
  hwc = hwc.contiguous();
  if (hwc.size(2) == 1) hwc = hwc.expand({hwc.size(0), hwc.size(1), 3}).contiguous();
  cv::Mat rgb(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3,
              hwc.data_ptr<std::uint8_t>());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write " + path.string());
}

Image load_image(const fs::path& path) {
  auto u8 = read_image_u8(path);
  if (!u8) throw IoError("cannot decode image " + path.string());
  return Image(normalize(u8->permute({2, 0, 1})));
}

Image prepare_image(const torch::Tensor& hwc_u8, int resolution) {
  auto chw = normalize(hwc_u8.permute({2, 0, 1}));
  chw = resize(center_crop_square(chw), resolution, resolution);
  return Image(chw.clamp(-1.0f, 1.0f).contiguous());
}

std::vector<Image> load_image_dir(const fs::path& dir, int resolution,
                                  std::vector<fs::path>* names) {
  if (!fs::is_directory(dir)) throw ConfigError("image directory does not exist: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> images;
  for (const auto& f : files) {
    auto u8 = read_image_u8(f);
    if (!u8) {
      std::cerr << "warning: skipping undecodable file " << f.string() << '\n';
      continue;
    }
    images.push_back(prepare_image(*u8, resolution));
    if (names) names->push_back(f);
  }
  if (images.empty()) throw ConfigError("no decodable images in " + dir.string());
  return images;
}

UnpairedDataset load_unpaired_dataset(const fs::path& sharp_dir, const fs::path& real_dir,
                                      int resolution) {
  UnpairedDataset ds;
  ds.resolution = resolution;
  ds.sharp_set = load_image_dir(sharp_dir, resolution);
  ds.real_sc_set = load_image_dir(real_dir, resolution);
  return ds;
}

BatchStream::BatchStream(const std::vector<Image>& images, int batch_size, std::uint64_t seed)
    : images_(&images), batch_size_(batch_size), seed_(seed) {
  if (images.empty()) throw ConfigError("batch stream over an empty image set");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
}

std::vector<std::size_t> BatchStream::permutation(std::int64_t epoch) const {
  std::vector<std::size_t> p(images_->size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
  std::mt19937_64 eng = SeedTree(seed_).engine(streams::kDataOrder, static_cast<std::uint64_t>(epoch));
  for (std::size_t i = p.size(); i > 1; --i) {
    std::swap(p[i - 1], p[eng() % i]);
  }
  return p;
}

std::vector<std::size_t> BatchStream::indices(std::int64_t step) const {
  const auto n = static_cast<std::int64_t>(images_->size());
  std::vector<std::size_t> out;
  out.reserve(batch_size_);
  std::int64_t pos = step * batch_size_;
  std::int64_t epoch = -1;
  std::vector<std::size_t> perm;
  for (int b = 0; b < batch_size_; ++b, ++pos) {
    if (pos / n != epoch) {
      epoch = pos / n;
      perm = permutation(epoch);
    }
    out.push_back(perm[pos % n]);
  }
  return out;
}

torch::Tensor BatchStream::batch(std::int64_t step) const {
  std::vector<torch::Tensor> items;
  for (auto i : indices(step)) items.push_back((*images_)[i].tensor());
  return torch::stack(items);
}

torch::Tensor stack(const std::vector<Image>& images) {
  std::vector<torch::Tensor> items;
  items.reserve(images.size());
  for (const auto& im : images) items.push_back(im.tensor());
  return torch::stack(items);
}

std::vector<Image> synthetic_images(int count, int resolution, std::uint64_t seed) {
  SeedTree tree(seed);
  std::vector<Image> out;
  out.reserve(count);
  const int r = resolution;
  for (int n = 0; n < count; ++n) {
    auto eng = tree.engine("synthetic", static_cast<std::uint64_t>(n));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto color = [&] { return std::array<double, 3>{u(eng), u(eng), u(eng)}; };
    std::vector<double> img(3 * r * r);
    auto at = [&](int c, int y, int x) -> double& { return img[(c * r + y) * r + x]; };

    const auto c0 = color();
    const auto c1 = color();
    const double ga = u(eng) * 2 * std::numbers::pi;
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) {
        const double t = 0.5 + 0.5 * (std::cos(ga) * (x + 0.5 - r / 2.0) +
                                      std::sin(ga) * (y + 0.5 - r / 2.0)) / r;
        for (int c = 0; c < 3; ++c) at(c, y, x) = c0[c] * (1 - t) + c1[c] * t;
      }
    }
    const int shapes = 2 + static_cast<int>(eng() % 4);
    for (int s = 0; s < shapes; ++s) {
      const auto col = color();
      const double cx = u(eng) * r, cy = u(eng) * r;
      const double rad = (0.1 + 0.3 * u(eng)) * r;
      const bool circle = (eng() & 1) != 0;
      for (int y = 0; y < r; ++y) {
        for (int x = 0; x < r; ++x) {
          const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
          const double d = circle ? std::sqrt(dx * dx + dy * dy) - rad
                                  : std::max(std::abs(dx), std::abs(dy)) - rad;
          const double alpha = 1.0 / (1.0 + std::exp(d * 1.5));
          for (int c = 0; c < 3; ++c) at(c, y, x) = at(c, y, x) * (1 - alpha) + col[c] * alpha;
        }
      }
    }
    const double tex_amp = 0.06 * u(eng);
    const double tf = 2.0 + 6.0 * u(eng);
    const double tp = u(eng) * 2 * std::numbers::pi;
    std::normal_distribution<double> grain(0.0, 0.015);
    auto t = torch::empty({3, r, r}, torch::kFloat32);
    auto* p = t.data_ptr<float>();
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < r; ++y) {
        for (int x = 0; x < r; ++x) {
          double v = at(c, y, x) +
                     tex_amp * std::sin(2 * std::numbers::pi * tf * (x + 0.7 * y) / r + tp) +
                     grain(eng);
          const double level = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
          p[(c * r + y) * r + x] = normalize_value(level);
        }
      }
    }
    out.emplace_back(t);
  }
  return out;
}

}  // namespace s2r
