// systolic.hpp - cycle-accurate output-stationary systolic array
//
// A streams West->East (row i skewed by i cycles), B streams North->South
// (column j skewed by j cycles), so PE(i,j) meets A[i,k] and B[k,j] at
// cycle i+j+k and accumulates C[i,j] locally. Results leave through a
// South shift chain after the compute phase.
//
// Power-saving features:
//   enable_bic  - each column's North edge bus-invert encodes weights;
//                 every PE latches the encoded wires and decodes with XORs
//                 in front of its multiplier.
//   enable_zvcg - each row's West edge flags zero inputs; a flagged value
//                 freezes the 16-bit input register (only the 1-bit flag
//                 is latched) and the MAC is skipped.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "satoggle/bf16.hpp"
#include "satoggle/coding.hpp"
#include "satoggle/matrix.hpp"

namespace satoggle {

enum class AccumulateMode {
  kBf16PerStep,  // acc = add(acc, mul(a, b)), bf16 rounding every step
  kSingle,       // 32-bit single accumulator, one rounding at readout
};

struct ArrayConfig {
  int rows = 16;
  int cols = 16;
  bool enable_bic = false;
  bool enable_zvcg = false;
  SegmentLayout layout = SegmentLayout::mantissa_only();
  AccumulateMode acc_mode = AccumulateMode::kBf16PerStep;
  // Depth of one streaming pass; the workload driver splits K into chunks
  // of this size.
  int k_tile = 16;

  // Throws std::invalid_argument on non-positive dimensions.
  void validate() const;
};

struct ActivityCounters {
  std::uint64_t input_reg_toggles = 0;
  std::uint64_t weight_reg_toggles = 0;
  std::uint64_t inv_bit_toggles = 0;
  std::uint64_t iszero_bit_toggles = 0;
  std::uint64_t acc_toggles = 0;
  std::uint64_t unload_toggles = 0;

  // Breakdown of weight_reg_toggles by bf16 field.
  std::uint64_t weight_sign_toggles = 0;
  std::uint64_t weight_exponent_toggles = 0;
  std::uint64_t weight_mantissa_toggles = 0;
  // Part of weight_reg_toggles on lines covered by the coding layout.
  std::uint64_t weight_covered_toggles = 0;

  std::uint64_t macs_performed = 0;
  std::uint64_t macs_skipped = 0;
  std::uint64_t cycles = 0;         // compute phase
  std::uint64_t unload_cycles = 0;

  // Data/weight loading: everything that travels the horizontal and
  // vertical operand pipelines, sidebands included.
  std::uint64_t streaming_toggles() const {
    return input_reg_toggles + weight_reg_toggles + inv_bit_toggles +
           iszero_bit_toggles;
  }

  ActivityCounters& operator+=(const ActivityCounters& o);
  friend ActivityCounters operator+(ActivityCounters a, const ActivityCounters& b) {
    return a += b;
  }
  friend bool operator==(const ActivityCounters&, const ActivityCounters&) = default;
};

struct PEState {
  Bf16 input_reg;           // West->East pipeline register
  bool iszero = false;      // sideband travelling with input_reg
  bool input_valid = false;
  BusState weight_bus;      // North->South pipeline (wires + inv sideband)
  bool weight_valid = false;
  std::uint32_t acc = 0;    // bf16 pattern, or single bits in kSingle mode
};

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SystolicArray {
 public:
  explicit SystolicArray(ArrayConfig cfg);

  // One clock edge. west has one entry per row, north one per column;
  // std::nullopt is a bubble (lane holds its registers).
  void step(std::span<const std::optional<Bf16>> west,
            std::span<const std::optional<Bf16>> north);

  // Shifts all accumulators out through the South edge (rows cycles) and
  // returns the rows x cols result grid. Accumulators are +0 afterwards.
  Matrix unload();

  const PEState& pe(int i, int j) const { return pes_[index(i, j)]; }
  Bf16 accumulator(int i, int j) const;
  const ActivityCounters& counters() const { return counters_; }
  const ArrayConfig& config() const { return cfg_; }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg_.cols) +
           static_cast<std::size_t>(j);
  }
  void mac(PEState& pe);

  ArrayConfig cfg_;
  std::vector<PEState> pes_;
  ActivityCounters counters_;
};

// Operand indices entering the array edges at cycle t: west_k[i] is the k
// of A[i,k] entering row i, north_k[j] the k of B[k,j] entering column j.
struct Injection {
  std::vector<std::optional<std::size_t>> west_k;
  std::vector<std::optional<std::size_t>> north_k;
};

Injection inject_schedule(std::size_t m, std::size_t k, std::size_t n,
                          std::size_t t);

// Number of compute cycles for an m x k x n tile: (m-1)+(n-1)+(k-1)+1.
std::size_t compute_cycles(std::size_t m, std::size_t k, std::size_t n);

struct TileResult {
  Matrix c;
  ActivityCounters counters;
};

// Runs one tile from reset state: compute phase then unload. The tile is
// simulated on an a.rows() x b.cols() sub-array (no zero padding), so the
// unload chain is a.rows() deep.
// Requires a.cols() == b.rows(), a.rows() <= rows, b.cols() <= cols.
TileResult run_tile(const Matrix& a, const Matrix& b, const ArrayConfig& cfg);

}  // namespace satoggle
