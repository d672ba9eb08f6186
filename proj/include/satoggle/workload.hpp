// workload.hpp - GEMM workloads: manifest + raw tensors, tiling driver,
// synthetic generators.
//
// Tensor files are headerless, row-major, little-endian 16-bit words
// (exactly rows*cols*2 bytes). A layer computes C = inputs x weights with
// inputs M x K (activations, West edge) and weights K x N (North edge).
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "satoggle/matrix.hpp"
#include "satoggle/systolic.hpp"

namespace satoggle {

class WorkloadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LayerSpec {
  std::string name;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::string weights;  // K x N tensor, relative to the manifest directory
  std::string inputs;   // M x K tensor
  nlohmann::json meta = nlohmann::json::object();
};

struct Manifest {
  std::string model_name;
  std::string dtype = "bf16";
  std::vector<LayerSpec> layers;
};

struct LayerData {
  LayerSpec spec;
  Matrix inputs;
  Matrix weights;
};

Matrix load_tensor(const std::filesystem::path& path, std::size_t rows, std::size_t cols);
void store_tensor(const std::filesystem::path& path, const Matrix& m);

Manifest parse_manifest(const nlohmann::json& j);
nlohmann::json manifest_to_json(const Manifest& m);
Manifest load_manifest(const std::filesystem::path& path);

// Loads every tensor referenced by the manifest at manifest_path.
std::vector<LayerData> load_layers(const std::filesystem::path& manifest_path);

// Writes manifest.json plus <layer>.inputs.bf16 / <layer>.weights.bf16.
void write_model(const std::filesystem::path& dir, const std::string& model_name,
                 const std::vector<LayerData>& layers);

// Splits the GEMM into rows x k_tile and k_tile x cols tiles, runs each on
// a fresh array and combines partial outputs across K tiles on the host
// with bf16 add in K order. Host-side combination is not counted.
TileResult tile_and_run(const Matrix& inputs, const Matrix& weights, const ArrayConfig& cfg);
inline TileResult tile_and_run(const LayerData& layer, const ArrayConfig& cfg) {
  return tile_and_run(layer.inputs, layer.weights, cfg);
}

enum class SynthKind {
  kUniformMantissaWeights,  // random sign, exponent in [0x76,0x7E], uniform mantissa
  kGaussianWeights,         // N(0, sigma^2) clipped to [-1,1]
  kZeroFractionInputs,      // Gaussian weights; the kind stresses the input zeros
};

struct SynthParams {
  SynthKind kind = SynthKind::kGaussianWeights;
  double sigma = 0.05;
  // Probability that an input entry is exactly zero; others are uniform
  // in (0,1].
  double zero_fraction = 0.0;
};

// Deterministic in (params, dims, seed, layer_index). Throws
// std::invalid_argument for sigma <= 0 or zero_fraction outside [0,1].
LayerData synth_layer(const SynthParams& params, std::size_t m, std::size_t k,
                      std::size_t n, std::uint64_t seed, std::size_t layer_index = 0,
                      std::string name = {});

struct SynthSpec {
  SynthParams params;
  std::size_t layers = 4;
  std::size_t m = 64;
  std::size_t k = 72;
  std::size_t n = 32;
  std::string model_name = "synthetic";
};

// "key=value,..." with keys kind (uniform-mantissa|gaussian|zero-fraction),
// sigma, z, layers, m, k, n, name. Unknown keys are an error.
SynthSpec parse_synth_spec(std::string_view text);
std::vector<LayerData> synth_model(const SynthSpec& spec, std::uint64_t seed);

std::string_view to_string(SynthKind kind);

}  // namespace satoggle
