#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "satoggle/bf16.hpp"

using namespace satoggle;

TEST_CASE("from_single on exact values") {
  CHECK(from_single(1.0f).bits == 0x3F80);
  CHECK(from_single(-1.0f).bits == 0xBF80);
  CHECK(from_single(0.0f).bits == 0x0000);
  CHECK(from_single(-0.0f).bits == 0x8000);
  CHECK(from_single(std::bit_cast<float>(0x7F800000u)).bits == 0x7F80);
}

TEST_CASE("from_single ties round to even") {
  // Low half exactly 0x8000: even upper half stays, odd upper half rounds up.
  CHECK(from_single(std::bit_cast<float>(0x3F808000u)).bits == 0x3F80);
  CHECK(from_single(std::bit_cast<float>(0x3F818000u)).bits == 0x3F82);
  CHECK(from_single(std::bit_cast<float>(0xBF818000u)).bits == 0xBF82);
  // Just above / below the tie.
  CHECK(from_single(std::bit_cast<float>(0x3F808001u)).bits == 0x3F81);
  CHECK(from_single(std::bit_cast<float>(0x3F807FFFu)).bits == 0x3F80);
  // Largest finite single overflows to Inf; mantissa carry bumps exponent.
  CHECK(from_single(std::bit_cast<float>(0x7F7FFFFFu)).bits == 0x7F80);
  CHECK(from_single(std::bit_cast<float>(0x3FFFC000u)).bits == 0x4000);
}

TEST_CASE("from_single matches the rounding oracle on sampled singles") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 2'000'000; ++i) {
    auto u = static_cast<std::uint32_t>(gen());
    if (i % 4 == 0) u = (u & 0xFFFF0000u) | 0x8000u;  // force ties
    const float x = std::bit_cast<float>(u);
    if (std::isnan(x)) continue;
    REQUIRE(from_single(x).bits == oracle::round_single(x));
  }
}

TEST_CASE("NaN conversion keeps a NaN") {
  const Bf16 quiet = from_single(std::bit_cast<float>(0x7FC00000u));
  CHECK(quiet.bits == 0x7FC0);
  // Payload only in the dropped half still yields a NaN.
  const Bf16 low_payload = from_single(std::bit_cast<float>(0x7F800001u));
  CHECK(low_payload.is_nan());
  CHECK((low_payload.bits & 0x40) != 0);
}

TEST_CASE("widen then narrow is the identity on all 65536 patterns") {
  for (std::uint32_t b = 0; b < 0x10000; ++b) {
    const Bf16 w(static_cast<std::uint16_t>(b));
    REQUIRE(from_single(w.to_float()) == w);
  }
}

TEST_CASE("fields and reassembly") {
  CHECK(fields(Bf16(0x3F80)) == Bf16Fields{0, 0x7F, 0x00});
  CHECK(fields(Bf16(0xBF80)) == Bf16Fields{1, 0x7F, 0x00});
  CHECK(fields(Bf16(0x0001)) == Bf16Fields{0, 0x00, 0x01});
  for (std::uint32_t b = 0; b < 0x10000; ++b) {
    const Bf16 w(static_cast<std::uint16_t>(b));
    REQUIRE(Bf16::from_fields(w.fields()) == w);
  }
  // Inf/NaN patterns are plain storage.
  CHECK(Bf16(0x7F81).is_nan());
  CHECK(Bf16(0xFF80).is_inf());
}

TEST_CASE("is_zero") {
  CHECK(is_zero(Bf16(0x0000)));
  CHECK(is_zero(Bf16(0x8000)));
  CHECK_FALSE(is_zero(Bf16(0x0001)));
  CHECK_FALSE(is_zero(Bf16(0x8001)));
}

TEST_CASE("hamming") {
  CHECK(hamming(0x00u, 0xFFu) == 8);
  CHECK(hamming(0x5Au, 0x5Au) == 0);
  std::mt19937_64 gen(3);
  for (int i = 0; i < 100000; ++i) {
    const auto a = static_cast<std::uint16_t>(gen());
    const auto b = static_cast<std::uint16_t>(gen());
    REQUIRE(hamming(a, b) == oracle::hamming_loop(a, b, 16));
  }
}

TEST_CASE("mul identities") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 10000; ++i) {
    const Bf16 x = oracle::random_finite(gen);
    REQUIRE(mul(Bf16(0x3F80), x) == x);
    const std::uint16_t zero_sign = (x.bits & 0x8000);
    REQUIRE(mul(Bf16(0x0000), x).bits == zero_sign);
    REQUIRE(mul(Bf16(0x8000), x).bits == (zero_sign ^ 0x8000));
  }
}

TEST_CASE("add identities") {
  CHECK(add(Bf16(0x3F80), Bf16(0x3F80)).bits == 0x4000);
  std::mt19937_64 gen(6);
  for (int i = 0; i < 10000; ++i) {
    const Bf16 x = oracle::random_finite(gen);
    if (x.is_zero()) continue;
    REQUIRE(add(x, Bf16(0x0000)) == x);
    REQUIRE(add(Bf16(0x8000), x) == x);
  }
  CHECK(add(Bf16(0x8000), Bf16(0x8000)).bits == 0x8000);
  CHECK(add(Bf16(0x8000), Bf16(0x0000)).bits == 0x0000);
  CHECK(add(Bf16(0x3F80), Bf16(0xBF80)).bits == 0x0000);  // exact cancellation -> +0
}

TEST_CASE("mul and add match the single-precision oracle bit-exactly") {
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 1'000'000; ++i) {
    const Bf16 a = oracle::random_finite(gen);
    const Bf16 b = oracle::random_finite(gen);
    REQUIRE(mul(a, b) == oracle::ref_mul(a, b));
    REQUIRE(add(a, b) == oracle::ref_add(a, b));
  }
}

TEST_CASE("arithmetic near the subnormal and overflow boundaries") {
  std::mt19937_64 gen(77);
  for (int i = 0; i < 200000; ++i) {
    // Exponents clustered at the extremes.
    auto pick = [&] {
      const auto r = gen();
      const std::uint16_t e = (r & 2) ? static_cast<std::uint16_t>(r >> 8) % 6
                                      : static_cast<std::uint16_t>(0xF9 + (r >> 8) % 6);
      return Bf16(static_cast<std::uint16_t>(((r & 1) << 15) | (e << 7) | ((r >> 20) & 0x7F)));
    };
    const Bf16 a = pick();
    const Bf16 b = pick();
    if (a.is_nan() || b.is_nan() || a.is_inf() || b.is_inf()) continue;
    REQUIRE(add(a, b) == oracle::ref_add(a, b));
    REQUIRE(mul(a, b) == oracle::ref_mul(a, b));
    // Mixed-magnitude products land in the subnormal range.
    const Bf16 c = oracle::random_finite(gen);
    REQUIRE(mul(a, c) == oracle::ref_mul(a, c));
  }
}

TEST_CASE("special values") {
  const Bf16 inf(0x7F80), ninf(0xFF80), nan(0x7FA0), one(0x3F80);
  CHECK(mul(inf, Bf16(0x0000)).bits == Bf16::kCanonicalNaN);
  CHECK(mul(inf, one) == inf);
  CHECK(mul(ninf, one) == ninf);
  CHECK(add(inf, ninf).bits == Bf16::kCanonicalNaN);
  CHECK(add(inf, one) == inf);
  CHECK(add(nan, one).bits == Bf16::kCanonicalNaN);
  CHECK(mul(one, nan).bits == Bf16::kCanonicalNaN);
  // Overflow of finite operands.
  CHECK(mul(Bf16(0x7F00), Bf16(0x7F00)) == inf);
  CHECK(add(Bf16(0x7F7F), Bf16(0x7F7F)) == inf);
}
