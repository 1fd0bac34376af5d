#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace spectral_lab {

// 64-bit FNV-1a, incremental.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update(double x) { update(&x, sizeof x); }
  void update(std::uint64_t x) { update(&x, sizeof x); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  Fnv1a64 h;
  h.update(s);
  return h.value();
}

}  // namespace spectral_lab
