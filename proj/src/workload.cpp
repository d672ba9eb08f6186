#include "satoggle/workload.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>

#include "satoggle/rng.hpp"

namespace satoggle {

namespace fs = std::filesystem;

Matrix load_tensor(const fs::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorkloadError("cannot open tensor " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (in.bad()) throw WorkloadError("read error on " + path.string());
  const std::size_t expected = rows * cols * 2;
  if (bytes.size() != expected) {
    throw WorkloadError(path.string() + ": " + std::to_string(bytes.size()) +
                        " bytes, expected " + std::to_string(expected) + " for " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  auto values = m.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = Bf16(static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
  }
  return m;
}

void store_tensor(const fs::path& path, const Matrix& m) {
  std::vector<char> bytes;
  bytes.reserve(m.size() * 2);
  for (Bf16 v : m.values()) {
    bytes.push_back(static_cast<char>(v.bits & 0xFF));
    bytes.push_back(static_cast<char>(v.bits >> 8));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WorkloadError("cannot create tensor " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WorkloadError("write error on " + path.string());
}

Manifest parse_manifest(const nlohmann::json& j) {
  try {
    Manifest m;
    m.model_name = j.at("model_name").get<std::string>();
    m.dtype = j.at("dtype").get<std::string>();
    if (m.dtype != "bf16") throw WorkloadError("dtype must be \"bf16\", got \"" + m.dtype + "\"");
    std::set<std::string> names;
    for (const auto& l : j.at("layers")) {
      LayerSpec s;
      s.name = l.at("name").get<std::string>();
      s.m = l.at("m").get<std::size_t>();
      s.k = l.at("k").get<std::size_t>();
      s.n = l.at("n").get<std::size_t>();
      s.weights = l.at("weights").get<std::string>();
      s.inputs = l.at("inputs").get<std::string>();
      if (l.contains("meta")) {
        if (!l["meta"].is_object()) throw WorkloadError("layer meta must be an object");
        s.meta = l["meta"];
      }
      if (!names.insert(s.name).second) throw WorkloadError("duplicate layer name " + s.name);
      m.layers.push_back(std::move(s));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw WorkloadError(std::string("malformed manifest: ") + e.what());
  }
}

nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& s : m.layers) {
    layers.push_back({{"name", s.name},
                      {"m", s.m},
                      {"k", s.k},
                      {"n", s.n},
                      {"weights", s.weights},
                      {"inputs", s.inputs},
                      {"meta", s.meta}});
  }
  return {{"model_name", m.model_name}, {"dtype", m.dtype}, {"layers", layers}};
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw WorkloadError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw WorkloadError(path.string() + ": " + e.what());
  }
  return parse_manifest(j);
}

std::vector<LayerData> load_layers(const fs::path& manifest_path) {
  const Manifest manifest = load_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<LayerData> layers;
  for (const LayerSpec& s : manifest.layers) {
    LayerData d{s, load_tensor(base / s.inputs, s.m, s.k), load_tensor(base / s.weights, s.k, s.n)};
    layers.push_back(std::move(d));
  }
  return layers;
}

void write_model(const fs::path& dir, const std::string& model_name,
                 const std::vector<LayerData>& layers) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw WorkloadError("cannot create " + dir.string() + ": " + ec.message());
  Manifest manifest{model_name, "bf16", {}};
  for (const LayerData& d : layers) {
    LayerSpec s = d.spec;
    s.inputs = s.name + ".inputs.bf16";
    s.weights = s.name + ".weights.bf16";
    store_tensor(dir / s.inputs, d.inputs);
    store_tensor(dir / s.weights, d.weights);
    manifest.layers.push_back(std::move(s));
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw WorkloadError("cannot write manifest in " + dir.string());
  out << manifest_to_json(manifest).dump(2) << '\n';
}

TileResult tile_and_run(const Matrix& inputs, const Matrix& weights, const ArrayConfig& cfg) {
  cfg.validate();
  if (inputs.cols() != weights.rows()) {
    throw std::invalid_argument("inputs are " + std::to_string(inputs.rows()) + "x" +
                                std::to_string(inputs.cols()) + " but weights have " +
                                std::to_string(weights.rows()) + " rows");
  }
  const std::size_t m = inputs.rows();
  const std::size_t k = inputs.cols();
  const std::size_t n = weights.cols();
  const auto rows = static_cast<std::size_t>(cfg.rows);
  const auto cols = static_cast<std::size_t>(cfg.cols);
  const auto depth = static_cast<std::size_t>(cfg.k_tile);

  TileResult result{Matrix(m, n), {}};
  for (std::size_t r0 = 0; r0 < m; r0 += rows) {
    const std::size_t mr = std::min(rows, m - r0);
    for (std::size_t c0 = 0; c0 < n; c0 += cols) {
      const std::size_t nc = std::min(cols, n - c0);
      for (std::size_t k0 = 0; k0 < k; k0 += depth) {
        const std::size_t kd = std::min(depth, k - k0);
        TileResult part = run_tile(inputs.block(r0, k0, mr, kd), weights.block(k0, c0, kd, nc), cfg);
        for (std::size_t i = 0; i < mr; ++i) {
          for (std::size_t j = 0; j < nc; ++j) {
            Bf16& out = result.c(r0 + i, c0 + j);
            out = k0 == 0 ? part.c(i, j) : add(out, part.c(i, j));
          }
        }
        result.counters += part.counters;
      }
    }
  }
  return result;
}

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::kUniformMantissaWeights: return "uniform-mantissa";
    case SynthKind::kGaussianWeights: return "gaussian";
    case SynthKind::kZeroFractionInputs: return "zero-fraction";
  }
  return "?";
}

LayerData synth_layer(const SynthParams& params, std::size_t m, std::size_t k, std::size_t n,
                      std::uint64_t seed, std::size_t layer_index, std::string name) {
  if (!(params.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(params.zero_fraction >= 0.0 && params.zero_fraction <= 1.0)) {
    throw std::invalid_argument("zero fraction must lie in [0,1]");
  }
  if (name.empty()) name = "layer" + std::to_string(layer_index);

  LayerData d;
  d.spec.name = std::move(name);
  d.spec.m = m;
  d.spec.k = k;
  d.spec.n = n;
  d.spec.meta = {{"generator", "synth"},
                 {"kind", std::string(to_string(params.kind))},
                 {"sigma", params.sigma},
                 {"zero_fraction", params.zero_fraction}};

  // Streams: 2*layer for inputs, 2*layer+1 for weights.
  auto input_gen = make_stream(seed, 2 * layer_index);
  d.inputs = Matrix(m, k);
  for (Bf16& v : d.inputs.values()) {
    const bool zero = uniform01(input_gen) < params.zero_fraction;
    const double u = 1.0 - uniform01(input_gen);  // (0,1]
    v = zero ? Bf16{} : from_single(static_cast<float>(u));
  }

  auto weight_gen = make_stream(seed, 2 * layer_index + 1);
  d.weights = Matrix(k, n);
  for (Bf16& v : d.weights.values()) {
    if (params.kind == SynthKind::kUniformMantissaWeights) {
      const std::uint64_t r = weight_gen();
      Bf16Fields f;
      f.sign = static_cast<std::uint8_t>(r & 1);
      f.exponent = static_cast<std::uint8_t>(0x76 + (r >> 1) % 9);
      f.mantissa = static_cast<std::uint8_t>((r >> 8) & 0x7F);
      v = Bf16::from_fields(f);
    } else {
      const double w = std::clamp(params.sigma * standard_normal(weight_gen), -1.0, 1.0);
      v = from_single(static_cast<float>(w));
    }
  }
  return d;
}

SynthSpec parse_synth_spec(std::string_view text) {
  SynthSpec spec;
  auto to_size = [](std::string_view key, std::string_view v) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
      throw std::invalid_argument("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
    }
    return out;
  };
  auto to_double = [](std::string_view key, std::string_view v) {
    std::size_t used = 0;
    double out = 0;
    try {
      out = std::stod(std::string(v), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) {
      throw std::invalid_argument("bad number for " + std::string(key) + ": '" + std::string(v) + "'");
    }
    return out;
  };

  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("synth spec item '" + std::string(item) + "' is not key=value");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "kind") {
      if (value == "uniform-mantissa") spec.params.kind = SynthKind::kUniformMantissaWeights;
      else if (value == "gaussian") spec.params.kind = SynthKind::kGaussianWeights;
      else if (value == "zero-fraction") spec.params.kind = SynthKind::kZeroFractionInputs;
      else throw std::invalid_argument("unknown synth kind '" + std::string(value) + "'");
    } else if (key == "sigma") {
      spec.params.sigma = to_double(key, value);
    } else if (key == "z") {
      spec.params.zero_fraction = to_double(key, value);
    } else if (key == "layers") {
      spec.layers = to_size(key, value);
    } else if (key == "m") {
      spec.m = to_size(key, value);
    } else if (key == "k") {
      spec.k = to_size(key, value);
    } else if (key == "n") {
      spec.n = to_size(key, value);
    } else if (key == "name") {
      if (value.empty()) throw std::invalid_argument("empty model name");
      spec.model_name = std::string(value);
    } else {
      throw std::invalid_argument("unknown synth key '" + std::string(key) + "'");
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (!(spec.params.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(spec.params.zero_fraction >= 0.0 && spec.params.zero_fraction <= 1.0)) {
    throw std::invalid_argument("z must lie in [0,1]");
  }
  if (spec.layers == 0) throw std::invalid_argument("layers must be at least 1");
  return spec;
}

std::vector<LayerData> synth_model(const SynthSpec& spec, std::uint64_t seed) {
  std::vector<LayerData> layers;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    layers.push_back(synth_layer(spec.params, spec.m, spec.k, spec.n, seed, l));
  }
  return layers;
}

}  // namespace satoggle
