#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace geoaug {

/// 64-bit FNV-1a, used for reproducibility fingerprints (config and
/// training-data checksums), not for security.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update(double v) { update(&v, sizeof v); }

  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string Fnv1a::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

inline std::string fnv1a_hex(std::string_view s) {
  Fnv1a h;
  h.update(s);
  return h.hex();
}

/// SplitMix64 finalizer over seed and salt; gives independent sub-seeds
/// for the stages of one seeded run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace geoaug
