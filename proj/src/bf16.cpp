#include "satoggle/bf16.hpp"

#include <algorithm>

namespace satoggle {

namespace {

// Finite nonzero value as significand * 2^exp2.
struct Unpacked {
  bool negative;
  std::uint64_t significand;
  int exp2;
};

// Unit exponent of the smallest subnormal: 2^(1 - 127 - 7).
constexpr int kMinUnitExp = 1 - Bf16::kExponentBias - Bf16::kMantissaBits;

Unpacked unpack(Bf16 a) {
  const auto f = a.fields();
  if (f.exponent == 0) {
    return {f.sign != 0, f.mantissa, kMinUnitExp};
  }
  return {f.sign != 0, std::uint64_t{f.mantissa} | 0x80u,
          f.exponent - Bf16::kExponentBias - Bf16::kMantissaBits};
}

constexpr Bf16 signed_zero(bool negative) {
  return Bf16(negative ? Bf16::kSignMask : std::uint16_t{0});
}

constexpr Bf16 signed_inf(bool negative) {
  return Bf16(static_cast<std::uint16_t>((negative ? Bf16::kSignMask : 0) |
                                         Bf16::kExponentMask));
}

// Rounds the exact value (-1)^negative * significand * 2^exp2 to bf16.
// significand == 0 yields a zero carrying the given sign.
Bf16 round_pack(bool negative, std::uint64_t significand, int exp2) {
  if (significand == 0) return signed_zero(negative);

  const int msb = 63 - std::countl_zero(significand);
  // Keep 8 significant bits, but never go below the subnormal quantum.
  const int shift = std::max(msb - Bf16::kMantissaBits, kMinUnitExp - exp2);

  std::uint64_t q;
  if (shift <= 0) {
    q = significand << -shift;
  } else if (shift >= 64) {
    q = (shift == 64 && significand > (std::uint64_t{1} << 63)) ? 1 : 0;
  } else {
    q = significand >> shift;
    const std::uint64_t rem = significand & ((std::uint64_t{1} << shift) - 1);
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    if (rem > half || (rem == half && (q & 1))) ++q;
  }
  if (q == 0) return signed_zero(negative);

  int unit_exp = exp2 + shift;
  if (q == 0x100) {
    q = 0x80;
    ++unit_exp;
  }
  const std::uint16_t sign_bit = negative ? Bf16::kSignMask : 0;
  if (q < 0x80) {
    // Subnormal: unit_exp is pinned at the minimum.
    return Bf16(static_cast<std::uint16_t>(sign_bit | q));
  }
  const int biased = unit_exp + Bf16::kMantissaBits + Bf16::kExponentBias;
  if (biased >= 0xFF) return signed_inf(negative);
  return Bf16(static_cast<std::uint16_t>(sign_bit | (biased << 7) |
                                         (q & Bf16::kMantissaMask)));
}

}  // namespace

Bf16 from_single(float x) {
  const auto u = std::bit_cast<std::uint32_t>(x);
  if ((u & 0x7F800000u) == 0x7F800000u && (u & 0x007FFFFFu) != 0) {
    auto upper = static_cast<std::uint16_t>(u >> 16);
    if ((upper & Bf16::kMantissaMask) == 0) upper |= 0x0040;
    return Bf16(upper);
  }
  const std::uint32_t rounding = 0x7FFFu + ((u >> 16) & 1u);
  return Bf16(static_cast<std::uint16_t>((u + rounding) >> 16));
}

Bf16 mul(Bf16 a, Bf16 b) {
  if (a.is_nan() || b.is_nan()) return Bf16(Bf16::kCanonicalNaN);
  const bool negative = ((a.bits ^ b.bits) & Bf16::kSignMask) != 0;
  if (a.is_inf() || b.is_inf()) {
    if (a.is_zero() || b.is_zero()) return Bf16(Bf16::kCanonicalNaN);
    return signed_inf(negative);
  }
  if (a.is_zero() || b.is_zero()) return signed_zero(negative);

  const Unpacked ua = unpack(a);
  const Unpacked ub = unpack(b);
  return round_pack(negative, ua.significand * ub.significand, ua.exp2 + ub.exp2);
}

Bf16 add(Bf16 a, Bf16 b) {
  if (a.is_nan() || b.is_nan()) return Bf16(Bf16::kCanonicalNaN);
  if (a.is_inf() || b.is_inf()) {
    if (a.is_inf() && b.is_inf() && a.bits != b.bits) {
      return Bf16(Bf16::kCanonicalNaN);
    }
    return a.is_inf() ? a : b;
  }
  if (a.is_zero() && b.is_zero()) {
    // -0 only when both are -0.
    return signed_zero((a.bits & b.bits & Bf16::kSignMask) != 0);
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;

  Unpacked big = unpack(a);
  Unpacked small = unpack(b);
  if (small.exp2 > big.exp2 ||
      (small.exp2 == big.exp2 && small.significand > big.significand)) {
    std::swap(big, small);
  }

  // Operands carry at most 8 significant bits, so a gap of up to 40 aligns
  // exactly in 64 bits. Beyond that the smaller operand is below every
  // rounding position and is folded into a sticky unit.
  constexpr int kExactGap = 40;
  constexpr int kStickyShift = 21;
  const int gap = big.exp2 - small.exp2;

  std::uint64_t magnitude;
  int exp2;
  if (gap <= kExactGap) {
    const std::uint64_t aligned = big.significand << gap;
    exp2 = small.exp2;
    magnitude = big.negative == small.negative ? aligned + small.significand
                                               : aligned - small.significand;
  } else {
    const std::uint64_t aligned = big.significand << kStickyShift;
    exp2 = big.exp2 - kStickyShift;
    magnitude = big.negative == small.negative ? aligned + 1 : aligned - 1;
  }
  // Exact cancellation rounds to +0.
  if (magnitude == 0) return signed_zero(false);
  return round_pack(big.negative, magnitude, exp2);
}

}  // namespace satoggle
