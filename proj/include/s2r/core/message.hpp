#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace s2r {

/// Fixed-length binary watermark payload. Every entry is exactly 0 or 1.
class WatermarkMessage {
 public:
  WatermarkMessage() = default;
  explicit WatermarkMessage(std::vector<std::uint8_t> bits);

  /// Hex digits, most significant bit first within each nibble. `length`
  /// must not exceed 4 * digits; surplus low bits of the last nibble must be 0.
  static WatermarkMessage from_hex(std::string_view hex, std::size_t length);
  static WatermarkMessage from_bitstring(std::string_view bits);
  /// Accepts either form: a string of only 0/1 with the expected length is a
  /// bitstring, anything else is parsed as hex (an optional 0x prefix is allowed).
  static WatermarkMessage parse(std::string_view text, std::size_t length);

  std::string to_hex() const;
  std::string to_bitstring() const;

  /// (L,) float tensor of 0/1.
  torch::Tensor to_tensor() const;

  std::size_t size() const noexcept { return bits_.size(); }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

  friend bool operator==(const WatermarkMessage&, const WatermarkMessage&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Percentage of mismatched bits, 100 * mismatches / length.
double ber(const WatermarkMessage& a, const WatermarkMessage& b);

}  // namespace s2r
