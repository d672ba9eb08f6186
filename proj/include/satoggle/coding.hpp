// coding.hpp - segmented bus-invert coding over a 16-bit word
//
// Each segment owns one inversion sideband bit. A segment is sent
// complemented when more than half of its lines would otherwise toggle
// relative to what is currently on the wires. Bits outside every segment
// pass through unencoded.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace satoggle {

struct Segment {
  int offset = 0;  // lowest bit index
  int width = 0;   // number of bits

  constexpr std::uint16_t mask() const {
    return static_cast<std::uint16_t>(((1u << width) - 1u) << offset);
  }
  friend bool operator==(const Segment&, const Segment&) = default;
};

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SegmentLayout {
 public:
  static constexpr int kWordBits = 16;
  static constexpr int kMaxSegments = 16;

  SegmentLayout() = default;
  // Throws LayoutError unless every segment is non-empty, inside [0,16) and
  // disjoint from the others.
  explicit SegmentLayout(std::vector<Segment> segments);

  // Mantissa-only layout of a bf16 weight: one segment at 0:7.
  static SegmentLayout mantissa_only() { return SegmentLayout({{0, 7}}); }

  // Parses "offset:width[,offset:width...]". Empty text is an empty layout.
  static SegmentLayout parse(std::string_view text);
  std::string to_string() const;

  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  std::uint16_t covered_mask() const { return covered_; }

  friend bool operator==(const SegmentLayout& a, const SegmentLayout& b) {
    return a.segments_ == b.segments_;
  }

 private:
  std::vector<Segment> segments_;
  std::uint16_t covered_ = 0;
};

// Physical state of an encoded bus. Bit s of inv_bits is the sideband line
// of segment s. Reset state is all zero.
struct BusState {
  std::uint16_t wire_bits = 0;
  std::uint16_t inv_bits = 0;

  friend bool operator==(const BusState&, const BusState&) = default;
};

struct EncodeResult {
  BusState next;
  int data_toggles = 0;     // over all 16 data lines
  int covered_toggles = 0;  // data lines inside a segment
  int inv_toggles = 0;
};

EncodeResult bic_encode(const SegmentLayout& layout, BusState state,
                        std::uint16_t raw);

std::uint16_t bic_decode(std::uint16_t wire, std::uint16_t inv_bits,
                         const SegmentLayout& layout);

// Exact rational num/den (not reduced).
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num * b.den == b.num * a.den;
  }
};

// E[min(H, width - H)] for H ~ Binomial(width, 1/2): the mean data-line
// toggles per step when a width-bit segment carries iid uniform words.
// Valid for 1 <= width <= 16; the denominator is 2^width.
Rational expected_uniform_toggles(int width);

}  // namespace satoggle
