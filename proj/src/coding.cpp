#include "satoggle/coding.hpp"

#include <algorithm>
#include <charconv>

#include "satoggle/bf16.hpp"

namespace satoggle {

SegmentLayout::SegmentLayout(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.size() > kMaxSegments) {
    throw LayoutError("too many segments");
  }
  for (const Segment& s : segments_) {
    if (s.width < 1 || s.offset < 0 || s.offset + s.width > kWordBits) {
      throw LayoutError("segment " + std::to_string(s.offset) + ":" +
                        std::to_string(s.width) + " outside [0,16)");
    }
    if (covered_ & s.mask()) {
      throw LayoutError("overlapping segment " + std::to_string(s.offset) +
                        ":" + std::to_string(s.width));
    }
    covered_ |= s.mask();
  }
}

SegmentLayout SegmentLayout::parse(std::string_view text) {
  std::vector<Segment> segments;
  auto parse_int = [&](std::string_view part) {
    int value = 0;
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, value);
    if (ec != std::errc{} || ptr != end || part.empty()) {
      throw LayoutError("bad segment field '" + std::string(part) + "'");
    }
    return value;
  };
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw LayoutError("segment '" + std::string(item) + "' is not offset:width");
    }
    segments.push_back({parse_int(item.substr(0, colon)),
                        parse_int(item.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw LayoutError("trailing comma in segment list");
  }
  return SegmentLayout(std::move(segments));
}

std::string SegmentLayout::to_string() const {
  std::string out;
  for (const Segment& s : segments_) {
    if (!out.empty()) out += ',';
    out += std::to_string(s.offset) + ":" + std::to_string(s.width);
  }
  return out;
}

EncodeResult bic_encode(const SegmentLayout& layout, BusState state,
                        std::uint16_t raw) {
  EncodeResult r;
  const std::uint16_t covered = layout.covered_mask();
  std::uint16_t wire = static_cast<std::uint16_t>(raw & ~covered);
  std::uint16_t inv = 0;

  for (std::size_t s = 0; s < layout.size(); ++s) {
    const Segment seg = layout.segments()[s];
    const std::uint16_t m = seg.mask();
    const int distance = hamming(state.wire_bits & m, raw & m);
    // Strictly more than half: 2H > w. Ties stay uninverted.
    if (2 * distance > seg.width) {
      wire |= static_cast<std::uint16_t>(~raw & m);
      inv |= static_cast<std::uint16_t>(1u << s);
    } else {
      wire |= static_cast<std::uint16_t>(raw & m);
    }
  }

  r.next = {wire, inv};
  r.data_toggles = hamming(state.wire_bits, wire);
  r.covered_toggles = hamming(state.wire_bits & covered, wire & covered);
  r.inv_toggles = hamming(state.inv_bits, inv);
  return r;
}

std::uint16_t bic_decode(std::uint16_t wire, std::uint16_t inv_bits,
                         const SegmentLayout& layout) {
  std::uint16_t raw = wire;
  for (std::size_t s = 0; s < layout.size(); ++s) {
    if (inv_bits & (1u << s)) raw ^= layout.segments()[s].mask();
  }
  return raw;
}

Rational expected_uniform_toggles(int width) {
  if (width < 1 || width > SegmentLayout::kWordBits) {
    throw LayoutError("segment width out of range");
  }
  std::uint64_t num = 0;
  std::uint64_t binom = 1;  // C(width, h)
  for (int h = 0; h <= width; ++h) {
    num += binom * static_cast<std::uint64_t>(std::min(h, width - h));
    binom = binom * static_cast<std::uint64_t>(width - h) /
            static_cast<std::uint64_t>(h + 1);
  }
  return {num, std::uint64_t{1} << width};
}

}  // namespace satoggle
