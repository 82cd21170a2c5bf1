#include "s2r/core/message.hpp"

#include <cctype>

#include "s2r/core/error.hpp"

namespace s2r {

WatermarkMessage::WatermarkMessage(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw ContractError("watermark bits must be 0 or 1");
  }
}

WatermarkMessage WatermarkMessage::from_hex(std::string_view hex, std::size_t length) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.size() * 4 < length) {
    throw ConfigError("hex message has " + std::to_string(hex.size() * 4) + " bits, need " +
                      std::to_string(length));
  }
  std::vector<std::uint8_t> bits;
  bits.reserve(hex.size() * 4);
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (std::isxdigit(static_cast<unsigned char>(c))) {
      v = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
    } else {
      throw ConfigError(std::string("invalid hex digit '") + c + "'");
    }
    for (int k = 3; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((v >> k) & 1));
  }
  for (std::size_t i = length; i < bits.size(); ++i) {
    if (bits[i] != 0) throw ConfigError("hex message longer than " + std::to_string(length) + " bits");
  }
  bits.resize(length);
  return WatermarkMessage(std::move(bits));
}

WatermarkMessage WatermarkMessage::from_bitstring(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw ConfigError(std::string("invalid bit '") + c + "'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return WatermarkMessage(std::move(bits));
}

WatermarkMessage WatermarkMessage::parse(std::string_view text, std::size_t length) {
  const bool binary = text.size() == length &&
                      text.find_first_not_of("01") == std::string_view::npos;
  return binary ? from_bitstring(text) : from_hex(text, length);
}

std::string WatermarkMessage::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits_.size(); i += 4) {
    int v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      v = (v << 1) | (i + k < bits_.size() ? bits_[i + k] : 0);
    }
    out.push_back(kDigits[v]);
  }
  return out;
}

std::string WatermarkMessage::to_bitstring() const {
  std::string out;
  out.reserve(bits_.size());
  for (auto b : bits_) out.push_back(static_cast<char>('0' + b));
  return out;
}

torch::Tensor WatermarkMessage::to_tensor() const {
  auto t = torch::empty({static_cast<int64_t>(bits_.size())}, torch::kFloat32);
  auto* p = t.data_ptr<float>();
  for (std::size_t i = 0; i < bits_.size(); ++i) p[i] = bits_[i];
  return t;
}

double ber(const WatermarkMessage& a, const WatermarkMessage& b) {
  if (a.size() != b.size()) {
    throw ShapeError("message length mismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.size() == 0) throw ShapeError("empty message");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < a.size(); ++i) wrong += a[i] != b[i];
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(a.size());
}

}  // namespace s2r
