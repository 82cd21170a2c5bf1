#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "s2r/core/image.hpp"

namespace s2r {

/// Two independent collections with no index correspondence: sharp images
/// (domain S) and real screen-camera captures (domain U).
struct UnpairedDataset {
  std::vector<Image> sharp_set;
  std::vector<Image> real_sc_set;
  int resolution = 0;
};

/// Decodes an image file into (H, W, 3) uint8 RGB. Empty optional when the
/// file cannot be decoded.
std::optional<torch::Tensor> read_image_u8(const std::filesystem::path& path);

/// Writes a (C, H, W) normalized image (or (H, W, C) uint8) losslessly as PNG.
void write_png(const std::filesystem::path& path, const torch::Tensor& image);

/// Normalized (3, H, W) image at native size.
Image load_image(const std::filesystem::path& path);

/// Crops the largest centred square, resizes to resolution x resolution and
/// normalizes to [-1, 1].
Image prepare_image(const torch::Tensor& hwc_u8, int resolution);

/// Every decodable image in `dir`, in filename order. Undecodable files are
/// skipped with a warning. Throws ConfigError when `dir` is missing or
/// yields no image.
std::vector<Image> load_image_dir(const std::filesystem::path& dir, int resolution,
                                  std::vector<std::filesystem::path>* names = nullptr);

UnpairedDataset load_unpaired_dataset(const std::filesystem::path& sharp_dir,
                                      const std::filesystem::path& real_dir, int resolution);

/// Deterministic minibatch sequence over a fixed image list: each epoch is a
/// seeded permutation, and batch k depends only on (seed, k).
class BatchStream {
 public:
  BatchStream(const std::vector<Image>& images, int batch_size, std::uint64_t seed);

  /// (B, C, H, W) batch for the given global step.
  torch::Tensor batch(std::int64_t step) const;
  std::vector<std::size_t> indices(std::int64_t step) const;

  std::size_t size() const { return images_->size(); }

 private:
  std::vector<std::size_t> permutation(std::int64_t epoch) const;

  const std::vector<Image>* images_;
  int batch_size_;
  std::uint64_t seed_;
};

/// Stack images into a (N, C, H, W) batch.
torch::Tensor stack(const std::vector<Image>& images);

/// Procedural stand-in for natural photographs: gradients, soft shapes and
/// mild texture, quantized to 8-bit levels.
std::vector<Image> synthetic_images(int count, int resolution, std::uint64_t seed);

}  // namespace s2r
