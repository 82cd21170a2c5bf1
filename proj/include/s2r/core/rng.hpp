#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <random>
#include <string_view>

namespace s2r {

/// One root seed fanned out to named, indexed substreams. A substream is a
/// pure function of (root, name, index), so resuming at step k needs nothing
/// but k, and perturbing one stream never shifts another.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const noexcept { return root_; }

  std::uint64_t derive(std::string_view stream, std::uint64_t index = 0) const;
  SeedTree child(std::string_view stream, std::uint64_t index = 0) const {
    return SeedTree(derive(stream, index));
  }

  torch::Generator generator(std::string_view stream, std::uint64_t index = 0) const;
  std::mt19937_64 engine(std::string_view stream, std::uint64_t index = 0) const {
    return std::mt19937_64(derive(stream, index));
  }

 private:
  std::uint64_t root_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Stream names used across the project.
namespace streams {
inline constexpr std::string_view kDataOrder = "data-order";
inline constexpr std::string_view kNoiseParams = "noise-params";
inline constexpr std::string_view kLatent = "latent-codes";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kMessages = "messages";
inline constexpr std::string_view kInterpolation = "interpolation";
}  // namespace streams

}  // namespace s2r
