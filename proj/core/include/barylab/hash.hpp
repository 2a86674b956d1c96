#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace barylab {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  void value(double x) {
    if (x == 0.0) x = 0.0;  // fold -0 into +0
    bytes(&x, sizeof x);
  }
  void value(std::uint64_t x) { bytes(&x, sizeof x); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[x & 0xf];
    x >>= 4;
  }
  return s;
}

}  // namespace barylab
