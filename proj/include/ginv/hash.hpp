#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <type_traits>

namespace ginv {

// 64-bit FNV-1a. Integers are fed little-endian so hashes are portable.
class Fnv64 {
 public:
  Fnv64& bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  template <typename T>
    requires std::is_integral_v<T>
  Fnv64& integer(T value) {
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      unsigned char b = static_cast<unsigned char>(u >> (8 * i));
      bytes(&b, 1);
    }
    return *this;
  }

  Fnv64& text(std::string_view s) { return bytes(s.data(), s.size()); }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv64(std::span<const unsigned char> data) {
  return Fnv64{}.bytes(data.data(), data.size()).digest();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace ginv
