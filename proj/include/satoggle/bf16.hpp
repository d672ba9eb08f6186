// bf16.hpp - Bfloat16 storage, rounding and arithmetic
//
// Bit layout: [15] sign, [14:7] exponent (bias 127), [6:0] mantissa.
// All operations round to nearest, ties to even. Subnormals are kept.
#pragma once

#include <bit>
#include <cstdint>
#include <compare>

namespace satoggle {

struct Bf16Fields {
  std::uint8_t sign;      // 1 bit
  std::uint8_t exponent;  // 8 bits
  std::uint8_t mantissa;  // 7 bits

  friend bool operator==(const Bf16Fields&, const Bf16Fields&) = default;
};

struct Bf16 {
  std::uint16_t bits = 0;

  static constexpr std::uint16_t kSignMask = 0x8000;
  static constexpr std::uint16_t kExponentMask = 0x7F80;
  static constexpr std::uint16_t kMantissaMask = 0x007F;
  static constexpr int kMantissaBits = 7;
  static constexpr int kExponentBias = 127;

  static constexpr std::uint16_t kCanonicalNaN = 0x7FC0;

  constexpr Bf16() = default;
  constexpr explicit Bf16(std::uint16_t b) : bits(b) {}

  constexpr Bf16Fields fields() const {
    return {static_cast<std::uint8_t>(bits >> 15),
            static_cast<std::uint8_t>((bits >> 7) & 0xFF),
            static_cast<std::uint8_t>(bits & kMantissaMask)};
  }

  static constexpr Bf16 from_fields(Bf16Fields f) {
    return Bf16(static_cast<std::uint16_t>(((f.sign & 1u) << 15) |
                                           (std::uint16_t{f.exponent} << 7) |
                                           (f.mantissa & kMantissaMask)));
  }

  constexpr bool is_nan() const {
    return (bits & kExponentMask) == kExponentMask && (bits & kMantissaMask) != 0;
  }
  constexpr bool is_inf() const {
    return (bits & 0x7FFF) == kExponentMask;
  }
  // +0 and -0 both count as zero.
  constexpr bool is_zero() const { return (bits & 0x7FFF) == 0; }

  // Places the pattern in the upper half of an IEEE single (exact).
  float to_float() const {
    return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
  }

  friend constexpr bool operator==(Bf16, Bf16) = default;
};

// Nearest-even conversion from IEEE single. NaNs keep their upper payload
// bits; a payload that would vanish on truncation is replaced by the quiet
// bit, so the result is always a NaN.
Bf16 from_single(float x);

Bf16 mul(Bf16 a, Bf16 b);
Bf16 add(Bf16 a, Bf16 b);

inline Bf16Fields fields(Bf16 a) { return a.fields(); }
inline bool is_zero(Bf16 a) { return a.is_zero(); }

// Number of differing bit positions between two equal-width patterns.
constexpr int hamming(std::uint32_t a, std::uint32_t b) {
  return std::popcount(a ^ b);
}
constexpr int hamming(Bf16 a, Bf16 b) { return hamming(a.bits, b.bits); }

}  // namespace satoggle
