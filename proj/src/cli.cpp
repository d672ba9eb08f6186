#include "satoggle/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "satoggle/analysis.hpp"
#include "satoggle/workload.hpp"

namespace satoggle {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SA_TOGGLE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) cap = static_cast<unsigned>(v);
  }
  return cap;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WorkloadError("cannot write " + path.string());
  out << text;
  if (!out) throw WorkloadError("write error on " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw WorkloadError("cannot create " + dir.string() + ": " + ec.message());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw WorkloadError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw WorkloadError(path.string() + ": " + e.what());
  }
}

enum class Format { kCsv, kJson, kBoth };

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  if (s == "both") return Format::kBoth;
  throw UsageError("--format must be csv, json or both");
}

bool wants_csv(Format f) { return f != Format::kJson; }
bool wants_json(Format f) { return f != Format::kCsv; }

struct SimulateOptions {
  std::string manifest;
  std::string synth;
  std::string preset;
  int rows = 16;
  int cols = 16;
  int k_tile = 16;
  std::optional<bool> bic;
  std::optional<bool> zvcg;
  std::string segments = "0:7";
  std::string acc_mode = "bf16";
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "both";
};

ArrayConfig array_config(const SimulateOptions& o) {
  ArrayConfig cfg;
  cfg.rows = o.rows;
  cfg.cols = o.cols;
  cfg.k_tile = o.k_tile;
  if (o.preset == "paper") {
    cfg.enable_bic = true;
    cfg.enable_zvcg = true;
  } else if (!o.preset.empty()) {
    throw UsageError("unknown preset '" + o.preset + "'");
  }
  if (o.bic) cfg.enable_bic = *o.bic;
  if (o.zvcg) cfg.enable_zvcg = *o.zvcg;
  try {
    cfg.layout = SegmentLayout::parse(o.segments);
  } catch (const LayoutError& e) {
    throw UsageError(std::string("--segments: ") + e.what());
  }
  if (o.acc_mode == "bf16") cfg.acc_mode = AccumulateMode::kBf16PerStep;
  else if (o.acc_mode == "single") cfg.acc_mode = AccumulateMode::kSingle;
  else throw UsageError("--acc-mode must be bf16 or single");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

nlohmann::json config_json(const ArrayConfig& cfg) {
  return {{"rows", cfg.rows},
          {"cols", cfg.cols},
          {"k_tile", cfg.k_tile},
          {"bic", cfg.enable_bic},
          {"zvcg", cfg.enable_zvcg},
          {"segments", cfg.layout.to_string()},
          {"acc_mode", cfg.acc_mode == AccumulateMode::kSingle ? "single" : "bf16"}};
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  // Everything that can be rejected is rejected before any file is touched.
  if (o.manifest.empty() == o.synth.empty()) {
    throw UsageError("give exactly one of --manifest or --synth");
  }
  const ArrayConfig cfg = array_config(o);
  const Format format = parse_format(o.format);
  std::optional<SynthSpec> synth;
  if (!o.synth.empty()) {
    try {
      synth = parse_synth_spec(o.synth);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--synth: ") + e.what());
    }
  }

  std::string model_name;
  std::vector<LayerData> layers;
  nlohmann::json source;
  if (synth) {
    layers = synth_model(*synth, o.seed);
    model_name = synth->model_name;
    source = {{"synth", o.synth}, {"seed", o.seed}};
  } else {
    model_name = load_manifest(o.manifest).model_name;
    layers = load_layers(o.manifest);
    source = {{"manifest", o.manifest}};
  }

  std::vector<TileResult> results(layers.size());
  std::vector<std::exception_ptr> errors(layers.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t l = next++; l < layers.size(); l = next++) {
      try {
        results[l] = tile_and_run(layers[l], cfg);
      } catch (...) {
        errors[l] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max<std::size_t>(1, layers.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const PowerProxyConfig proxy;
  ActivityCounters total;
  std::uint64_t expected_macs = 0;
  nlohmann::json layer_json = nlohmann::json::array();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& s = layers[l].spec;
    const ActivityCounters& c = results[l].counters;
    total += c;
    expected_macs += static_cast<std::uint64_t>(s.m) * s.k * s.n;
    layer_json.push_back({{"name", s.name},
                          {"m", s.m},
                          {"k", s.k},
                          {"n", s.n},
                          {"zero_frac", zero_fraction(layers[l].inputs.values())},
                          {"output", sanitize(s.name) + ".out.bf16"},
                          {"counters", to_json(c)},
                          {"proxy", to_json(power_proxy(c, proxy))}});
  }
  if (total.macs_performed + total.macs_skipped != expected_macs) {
    throw InvariantViolation("MAC conservation failed across layers");
  }

  const fs::path dir(o.out);
  make_dir(dir);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    store_tensor(dir / (sanitize(layers[l].spec.name) + ".out.bf16"), results[l].c);
  }
  const nlohmann::json run = {{"model_name", model_name},
                              {"source", source},
                              {"array", config_json(cfg)},
                              {"proxy_config", to_json(proxy)},
                              {"layers", layer_json},
                              {"totals", {{"counters", to_json(total)},
                                          {"proxy", to_json(power_proxy(total, proxy))}}}};
  write_text(dir / "run.json", run.dump(2) + "\n");
  if (wants_csv(format)) {
    std::string csv =
        "layer,m,k,n,zero_frac,input_reg_toggles,weight_reg_toggles,inv_bit_toggles,"
        "iszero_bit_toggles,acc_toggles,unload_toggles,macs_performed,macs_skipped,cycles\n";
    for (const auto& lj : layer_json) {
      const auto& c = lj["counters"];
      char zf[32];
      std::snprintf(zf, sizeof zf, "%.6f", lj["zero_frac"].get<double>());
      csv += lj["name"].get<std::string>() + "," + std::to_string(lj["m"].get<std::size_t>()) +
             "," + std::to_string(lj["k"].get<std::size_t>()) + "," +
             std::to_string(lj["n"].get<std::size_t>()) + "," + zf;
      for (const char* key : {"input_reg_toggles", "weight_reg_toggles", "inv_bit_toggles",
                              "iszero_bit_toggles", "acc_toggles", "unload_toggles",
                              "macs_performed", "macs_skipped", "cycles"}) {
        csv += "," + std::to_string(c[key].get<std::uint64_t>());
      }
      csv += "\n";
    }
    write_text(dir / "counters.csv", csv);
  }
  out << "simulated " << layers.size() << " layer(s), " << total.cycles << " compute cycles, "
      << total.streaming_toggles() << " streaming toggles -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_synth(const std::string& spec_text, std::uint64_t seed, const std::string& out_dir,
              std::ostream& out) {
  SynthSpec spec;
  try {
    spec = parse_synth_spec(spec_text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--spec: ") + e.what());
  }
  const auto layers = synth_model(spec, seed);
  write_model(out_dir, spec.model_name, layers);
  out << "wrote " << layers.size() << " layer(s) to " << out_dir << "\n";
  return kExitOk;
}

int cmd_analyze(const std::string& manifest_path, const std::string& out_dir, std::ostream& out) {
  const Manifest manifest = load_manifest(manifest_path);
  const auto layers = load_layers(manifest_path);

  nlohmann::json layer_json = nlohmann::json::array();
  std::string csv = "layer,tensor,field,bin,count\n";
  auto emit = [&csv](const std::string& layer, const char* tensor, const FieldHistograms& h) {
    auto rows = [&](const char* field, const auto& bins) {
      for (std::size_t b = 0; b < bins.size(); ++b) {
        if (bins[b] == 0) continue;
        csv += layer + "," + tensor + "," + field + "," + std::to_string(b) + "," +
               std::to_string(bins[b]) + "\n";
      }
    };
    rows("sign", h.sign);
    rows("exponent", h.exponent);
    rows("mantissa", h.mantissa);
  };

  for (const LayerData& d : layers) {
    const FieldHistograms wh = field_histograms(d.weights.values());
    const FieldHistograms ih = field_histograms(d.inputs.values());
    layer_json.push_back({{"name", d.spec.name},
                          {"m", d.spec.m},
                          {"k", d.spec.k},
                          {"n", d.spec.n},
                          {"weights", {{"zero_frac", zero_fraction(d.weights.values())},
                                       {"histograms", to_json(wh)}}},
                          {"inputs", {{"zero_frac", zero_fraction(d.inputs.values())},
                                      {"histograms", to_json(ih)}}}});
    emit(d.spec.name, "weights", wh);
    emit(d.spec.name, "inputs", ih);
  }
  const fs::path dir(out_dir);
  make_dir(dir);
  write_text(dir / "analysis.json",
             nlohmann::json{{"model_name", manifest.model_name}, {"layers", layer_json}}.dump(2) +
                 "\n");
  write_text(dir / "histograms.csv", csv);
  out << "analyzed " << layers.size() << " layer(s) -> " << out_dir << "\n";
  return kExitOk;
}

std::vector<LayerRun> load_run(const fs::path& dir) {
  const nlohmann::json run = read_json(dir / "run.json");
  std::vector<LayerRun> layers;
  try {
    for (const auto& l : run.at("layers")) {
      layers.push_back({l.at("name").get<std::string>(), l.at("m").get<std::size_t>(),
                        l.at("k").get<std::size_t>(), l.at("n").get<std::size_t>(),
                        l.at("zero_frac").get<double>(), counters_from_json(l.at("counters"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw WorkloadError((dir / "run.json").string() + ": " + e.what());
  }
  return layers;
}

int cmd_compare(const std::string& baseline, const std::string& proposed,
                const std::string& proxy_path, const std::string& out_dir,
                const std::string& format_text, std::ostream& out) {
  const Format format = parse_format(format_text);
  PowerProxyConfig proxy;
  if (!proxy_path.empty()) {
    try {
      proxy = proxy_from_json(read_json(proxy_path));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--proxy-config: ") + e.what());
    }
  }
  const auto base = load_run(baseline);
  const auto prop = load_run(proposed);
  CompareReport report;
  try {
    report = compare_report(base, prop, proxy);
  } catch (const std::invalid_argument& e) {
    throw WorkloadError(std::string("runs are not comparable: ") + e.what());
  }

  const fs::path dir(out_dir);
  make_dir(dir);
  if (wants_csv(format)) write_text(dir / "report.csv", report_csv(report));
  if (wants_json(format)) write_text(dir / "report.json", report_json(report).dump(2) + "\n");
  out << "overall streaming reduction "
      << reduction_pct(report.overall.base_power.streaming, report.overall.prop_power.streaming)
      << "%, total " << reduction_pct(report.overall.base_power.total, report.overall.prop_power.total)
      << "% -> " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bit-level systolic array switching-activity simulator"};
  app.require_subcommand(1);

  std::string synth_spec;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic workload (manifest + tensors)");
  synth->add_option("--spec", synth_spec, "key=value list: kind,sigma,z,layers,m,k,n,name")
      ->default_val("kind=gaussian,sigma=0.05,z=0.4,layers=4,m=64,k=72,n=32");
  synth->add_option("--seed", synth_seed, "Random seed")->default_val(1);
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string analyze_manifest;
  std::string analyze_out;
  auto* analyze = app.add_subcommand("analyze", "Field histograms and zero fractions per layer");
  analyze->add_option("--manifest", analyze_manifest, "Workload manifest")->required();
  analyze->add_option("--out", analyze_out, "Output directory")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a workload through the array");
  simulate->add_option("--manifest", sim.manifest, "Workload manifest");
  simulate->add_option("--synth", sim.synth, "Synthetic workload spec (see synth --spec)");
  simulate->add_option("--preset", sim.preset, "'paper': enable BIC and zero gating");
  simulate->add_option("--rows", sim.rows, "Array rows")->default_val(16);
  simulate->add_option("--cols", sim.cols, "Array columns")->default_val(16);
  simulate->add_option("--k-tile", sim.k_tile, "K depth per streaming pass")->default_val(16);
  auto* bic_on = simulate->add_flag("--bic", "Bus-invert code weights");
  auto* bic_off = simulate->add_flag("--no-bic", "Send weights uncoded");
  auto* zvcg_on = simulate->add_flag("--zvcg", "Zero-value clock gating on inputs");
  auto* zvcg_off = simulate->add_flag("--no-zvcg", "Disable zero gating");
  bic_on->excludes(bic_off);
  zvcg_on->excludes(zvcg_off);
  simulate->add_option("--segments", sim.segments, "BIC segments offset:width[,...]")
      ->default_val("0:7");
  simulate->add_option("--acc-mode", sim.acc_mode, "bf16 | single")->default_val("bf16");
  simulate->add_option("--seed", sim.seed, "Seed for --synth workloads")->default_val(1);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--format", sim.format, "counters.csv: csv|json|both")->default_val("both");

  std::string cmp_base, cmp_prop, cmp_out, cmp_proxy, cmp_format = "both";
  auto* compare = app.add_subcommand("compare", "Baseline vs proposed report");
  compare->add_option("--baseline", cmp_base, "Baseline simulate output dir")->required();
  compare->add_option("--proposed", cmp_prop, "Proposed simulate output dir")->required();
  compare->add_option("--proxy-config", cmp_proxy, "JSON power proxy weights");
  compare->add_option("--out", cmp_out, "Output directory")->required();
  compare->add_option("--format", cmp_format, "csv|json|both")->default_val("both");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadArguments;
  }

  try {
    if (*synth) return cmd_synth(synth_spec, synth_seed, synth_out, out);
    if (*analyze) return cmd_analyze(analyze_manifest, analyze_out, out);
    if (*simulate) {
      if (bic_on->count()) sim.bic = true;
      if (bic_off->count()) sim.bic = false;
      if (zvcg_on->count()) sim.zvcg = true;
      if (zvcg_off->count()) sim.zvcg = false;
      return cmd_simulate(sim, out);
    }
    if (*compare) return cmd_compare(cmp_base, cmp_prop, cmp_proxy, cmp_out, cmp_format, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const WorkloadError& e) {
    err << "workload error: " << e.what() << "\n";
    return kExitWorkloadIo;
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitBadArguments;
}

}  // namespace satoggle
