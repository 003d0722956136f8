#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace amptcr {

// 64-bit FNV-1a. Streaming so callers can feed a canonical byte encoding
// piece by piece.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  Fnv1a64& bytes(std::span<const std::uint8_t> data) noexcept {
    for (auto b : data) {
      state_ ^= b;
      state_ *= kPrime;
    }
    return *this;
  }
  Fnv1a64& text(std::string_view s) noexcept {
    return bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }
  // Integers are fed little-endian, fixed width.
  Fnv1a64& u64(std::uint64_t v) noexcept {
    std::uint8_t buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return bytes(buf);
  }
  Fnv1a64& i64(std::int64_t v) noexcept { return u64(static_cast<std::uint64_t>(v)); }

  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a64(std::string_view s) noexcept { return Fnv1a64{}.text(s).value(); }

// splitmix64 finalizer; used to derive independent streams from integer keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (mix64(b) + 0x632be59bd9b4e019ULL));
}

}  // namespace amptcr
