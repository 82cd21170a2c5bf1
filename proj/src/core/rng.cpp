#include "s2r/core/rng.hpp"

#include <ATen/CPUGeneratorImpl.h>

namespace s2r {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SeedTree::derive(std::string_view stream, std::uint64_t index) const {
  return splitmix64(splitmix64(root_ ^ fnv1a64(stream)) + index);
}

torch::Generator SeedTree::generator(std::string_view stream, std::uint64_t index) const {
  return at::make_generator<at::CPUGeneratorImpl>(derive(stream, index));
}

}  // namespace s2r
