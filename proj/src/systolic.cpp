#include "satoggle/systolic.hpp"

#include <string>

namespace satoggle {

void ArrayConfig::validate() const {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("array dimensions must be at least 1x1");
  }
  if (k_tile < 1) throw std::invalid_argument("k_tile must be at least 1");
}

ActivityCounters& ActivityCounters::operator+=(const ActivityCounters& o) {
  input_reg_toggles += o.input_reg_toggles;
  weight_reg_toggles += o.weight_reg_toggles;
  inv_bit_toggles += o.inv_bit_toggles;
  iszero_bit_toggles += o.iszero_bit_toggles;
  acc_toggles += o.acc_toggles;
  unload_toggles += o.unload_toggles;
  weight_sign_toggles += o.weight_sign_toggles;
  weight_exponent_toggles += o.weight_exponent_toggles;
  weight_mantissa_toggles += o.weight_mantissa_toggles;
  weight_covered_toggles += o.weight_covered_toggles;
  macs_performed += o.macs_performed;
  macs_skipped += o.macs_skipped;
  cycles += o.cycles;
  unload_cycles += o.unload_cycles;
  return *this;
}

SystolicArray::SystolicArray(ArrayConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  pes_.resize(static_cast<std::size_t>(cfg_.rows) * static_cast<std::size_t>(cfg_.cols));
}

Bf16 SystolicArray::accumulator(int i, int j) const {
  const std::uint32_t acc = pe(i, j).acc;
  if (cfg_.acc_mode == AccumulateMode::kSingle) {
    return from_single(std::bit_cast<float>(acc));
  }
  return Bf16(static_cast<std::uint16_t>(acc));
}

void SystolicArray::mac(PEState& p) {
  if (p.iszero) {
    ++counters_.macs_skipped;
    return;
  }
  const std::uint16_t weight =
      cfg_.enable_bic
          ? bic_decode(p.weight_bus.wire_bits, p.weight_bus.inv_bits, cfg_.layout)
          : p.weight_bus.wire_bits;
  const std::uint32_t old = p.acc;
  if (cfg_.acc_mode == AccumulateMode::kSingle) {
    const float product = p.input_reg.to_float() * Bf16(weight).to_float();
    p.acc = std::bit_cast<std::uint32_t>(std::bit_cast<float>(old) + product);
  } else {
    p.acc = add(Bf16(static_cast<std::uint16_t>(old)), mul(p.input_reg, Bf16(weight))).bits;
  }
  counters_.acc_toggles += static_cast<std::uint64_t>(hamming(old, p.acc));
  ++counters_.macs_performed;
}

void SystolicArray::step(std::span<const std::optional<Bf16>> west,
                         std::span<const std::optional<Bf16>> north) {
  if (west.size() != static_cast<std::size_t>(cfg_.rows) ||
      north.size() != static_cast<std::size_t>(cfg_.cols)) {
    throw std::invalid_argument("edge input width does not match the array");
  }

  // Walk from the South-East corner so every PE still sees its neighbours'
  // pre-edge registers.
  for (int i = cfg_.rows - 1; i >= 0; --i) {
    for (int j = cfg_.cols - 1; j >= 0; --j) {
      PEState& p = pes_[index(i, j)];

      // Horizontal lane.
      bool in_valid;
      Bf16 in_bits;
      bool in_zero;
      if (j == 0) {
        const auto& token = west[static_cast<std::size_t>(i)];
        in_valid = token.has_value();
        in_bits = token.value_or(Bf16{});
        in_zero = in_valid && cfg_.enable_zvcg && in_bits.is_zero();
      } else {
        const PEState& src = pes_[index(i, j - 1)];
        in_valid = src.input_valid;
        in_bits = src.input_reg;
        in_zero = src.iszero;
      }
      if (in_valid) {
        if (!in_zero) {
          counters_.input_reg_toggles +=
              static_cast<std::uint64_t>(hamming(p.input_reg, in_bits));
          p.input_reg = in_bits;
        }
        counters_.iszero_bit_toggles += (p.iszero != in_zero) ? 1 : 0;
        p.iszero = in_zero;
      }
      p.input_valid = in_valid;

      // Vertical lane.
      bool w_valid;
      BusState bus;
      if (i == 0) {
        const auto& token = north[static_cast<std::size_t>(j)];
        w_valid = token.has_value();
        if (w_valid) {
          bus = cfg_.enable_bic ? bic_encode(cfg_.layout, p.weight_bus, token->bits).next
                                : BusState{token->bits, 0};
        }
      } else {
        const PEState& src = pes_[index(i - 1, j)];
        w_valid = src.weight_valid;
        bus = src.weight_bus;
      }
      if (w_valid) {
        const std::uint16_t old = p.weight_bus.wire_bits;
        const std::uint16_t now = bus.wire_bits;
        counters_.weight_reg_toggles += static_cast<std::uint64_t>(hamming(old, now));
        counters_.weight_sign_toggles +=
            static_cast<std::uint64_t>(hamming(old & Bf16::kSignMask, now & Bf16::kSignMask));
        counters_.weight_exponent_toggles += static_cast<std::uint64_t>(
            hamming(old & Bf16::kExponentMask, now & Bf16::kExponentMask));
        counters_.weight_mantissa_toggles += static_cast<std::uint64_t>(
            hamming(old & Bf16::kMantissaMask, now & Bf16::kMantissaMask));
        const std::uint16_t covered = cfg_.layout.covered_mask();
        counters_.weight_covered_toggles +=
            static_cast<std::uint64_t>(hamming(old & covered, now & covered));
        counters_.inv_bit_toggles +=
            static_cast<std::uint64_t>(hamming(p.weight_bus.inv_bits, bus.inv_bits));
        p.weight_bus = bus;
      }
      p.weight_valid = w_valid;

      if (p.input_valid != p.weight_valid) {
        throw InvariantViolation("operand lanes out of step at PE(" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (p.input_valid) mac(p);
    }
  }
  ++counters_.cycles;
}

Matrix SystolicArray::unload() {
  Matrix out(static_cast<std::size_t>(cfg_.rows), static_cast<std::size_t>(cfg_.cols));
  for (int i = 0; i < cfg_.rows; ++i)
    for (int j = 0; j < cfg_.cols; ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = accumulator(i, j);

  const std::uint32_t zero = 0;  // +0 in both accumulator encodings
  for (int cycle = 0; cycle < cfg_.rows; ++cycle) {
    for (int i = cfg_.rows - 1; i >= 0; --i) {
      for (int j = 0; j < cfg_.cols; ++j) {
        PEState& p = pes_[index(i, j)];
        const std::uint32_t incoming = i == 0 ? zero : pes_[index(i - 1, j)].acc;
        counters_.unload_toggles += static_cast<std::uint64_t>(hamming(p.acc, incoming));
        p.acc = incoming;
      }
    }
    ++counters_.unload_cycles;
  }
  return out;
}

Injection inject_schedule(std::size_t m, std::size_t k, std::size_t n,
                          std::size_t t) {
  Injection inj;
  inj.west_k.resize(m);
  inj.north_k.resize(n);
  for (std::size_t i = 0; i < m; ++i)
    if (t >= i && t - i < k) inj.west_k[i] = t - i;
  for (std::size_t j = 0; j < n; ++j)
    if (t >= j && t - j < k) inj.north_k[j] = t - j;
  return inj;
}

std::size_t compute_cycles(std::size_t m, std::size_t k, std::size_t n) {
  if (m == 0 || k == 0 || n == 0) return 0;
  return (m - 1) + (n - 1) + (k - 1) + 1;
}

TileResult run_tile(const Matrix& a, const Matrix& b, const ArrayConfig& cfg) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("inner dimensions differ");
  }
  if (a.rows() > static_cast<std::size_t>(cfg.rows) ||
      b.cols() > static_cast<std::size_t>(cfg.cols)) {
    throw std::invalid_argument("tile " + std::to_string(a.rows()) + "x" +
                                std::to_string(b.cols()) + " exceeds the " +
                                std::to_string(cfg.rows) + "x" +
                                std::to_string(cfg.cols) + " array");
  }
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  const std::size_t n = b.cols();

  if (m == 0 || n == 0) return {Matrix(m, n), {}};

  // A partial tile occupies an m x n corner; the idle PEs never clock.
  ArrayConfig active = cfg;
  active.rows = static_cast<int>(m);
  active.cols = static_cast<int>(n);
  SystolicArray array(active);
  std::vector<std::optional<Bf16>> west(m);
  std::vector<std::optional<Bf16>> north(n);

  const std::size_t cycles = compute_cycles(m, k, n);
  for (std::size_t t = 0; t < cycles; ++t) {
    const Injection inj = inject_schedule(m, k, n, t);
    for (std::size_t i = 0; i < m; ++i)
      west[i] = inj.west_k[i] ? std::optional<Bf16>(a(i, *inj.west_k[i])) : std::nullopt;
    for (std::size_t j = 0; j < n; ++j)
      north[j] = inj.north_k[j] ? std::optional<Bf16>(b(*inj.north_k[j], j)) : std::nullopt;
    array.step(west, north);
  }

  const std::uint64_t expected = static_cast<std::uint64_t>(m) * k * n;
  const auto& counted = array.counters();
  if (counted.macs_performed + counted.macs_skipped != expected) {
    throw InvariantViolation("MAC count " +
                             std::to_string(counted.macs_performed + counted.macs_skipped) +
                             " != m*n*k " + std::to_string(expected));
  }

  Matrix c = array.unload();
  return {std::move(c), array.counters()};
}

}  // namespace satoggle
