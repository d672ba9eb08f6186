#include "satoggle/analysis.hpp"

#include <cstdio>
#include <stdexcept>

namespace satoggle {

FieldHistograms field_histograms(std::span<const Bf16> values) {
  FieldHistograms h;
  for (Bf16 v : values) {
    const auto f = v.fields();
    ++h.sign[f.sign];
    ++h.exponent[f.exponent];
    ++h.mantissa[f.mantissa];
  }
  h.total = values.size();
  return h;
}

double zero_fraction(std::span<const Bf16> values) {
  if (values.empty()) return 0.0;
  std::size_t zeros = 0;
  for (Bf16 v : values) zeros += v.is_zero() ? 1 : 0;
  return static_cast<double>(zeros) / static_cast<double>(values.size());
}

void PowerProxyConfig::validate() const {
  for (double w : {input_reg, weight_reg, inv_bit, iszero_bit, acc, unload, e_mac}) {
    if (!(w >= 0.0)) throw std::invalid_argument("power proxy weights must be non-negative");
  }
}

PowerBreakdown power_proxy(const ActivityCounters& c, const PowerProxyConfig& cfg) {
  auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  PowerBreakdown p;
  p.streaming = d(c.input_reg_toggles) * cfg.input_reg + d(c.weight_reg_toggles) * cfg.weight_reg +
                d(c.inv_bit_toggles) * cfg.inv_bit + d(c.iszero_bit_toggles) * cfg.iszero_bit;
  p.compute = d(c.macs_performed) * cfg.e_mac + d(c.acc_toggles) * cfg.acc;
  p.unload = d(c.unload_toggles) * cfg.unload;
  p.total = p.streaming + p.compute + p.unload;
  return p;
}

double reduction_pct(double base, double prop) {
  if (base == 0.0) return 0.0;
  return (base - prop) / base * 100.0;
}

CompareReport compare_report(const std::vector<LayerRun>& baseline,
                             const std::vector<LayerRun>& proposed,
                             const PowerProxyConfig& proxy) {
  proxy.validate();
  if (baseline.size() != proposed.size()) {
    throw std::invalid_argument("baseline has " + std::to_string(baseline.size()) +
                                " layers, proposed has " + std::to_string(proposed.size()));
  }
  CompareReport r;
  r.proxy = proxy;
  r.overall.layer = "overall";
  double zero_weighted = 0;
  double elements = 0;
  for (std::size_t l = 0; l < baseline.size(); ++l) {
    const LayerRun& b = baseline[l];
    const LayerRun& p = proposed[l];
    if (b.name != p.name || b.m != p.m || b.k != p.k || b.n != p.n) {
      throw std::invalid_argument("layer " + std::to_string(l) + " differs: " + b.name +
                                  " vs " + p.name);
    }
    ReportRow row{b.name, b.m, b.k, b.n, b.zero_frac, b.counters, p.counters,
                  power_proxy(b.counters, proxy), power_proxy(p.counters, proxy)};
    r.overall.base += b.counters;
    r.overall.prop += p.counters;
    const double mk = static_cast<double>(b.m * b.k);
    zero_weighted += b.zero_frac * mk;
    elements += mk;
    r.layers.push_back(std::move(row));
  }
  r.overall.zero_frac = elements > 0 ? zero_weighted / elements : 0.0;
  r.overall.base_power = power_proxy(r.overall.base, proxy);
  r.overall.prop_power = power_proxy(r.overall.prop, proxy);
  return r;
}

namespace {

std::string csv_row(const ReportRow& row, bool with_shape) {
  char buf[512];
  const std::string shape = with_shape ? std::to_string(row.m) + "," + std::to_string(row.k) +
                                             "," + std::to_string(row.n)
                                       : ",,";
  std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.3f,%.3f,%.4f,%.3f,%.3f,%.4f\n", row.layer.c_str(),
                shape.c_str(), row.zero_frac, row.base_power.streaming, row.prop_power.streaming,
                reduction_pct(row.base_power.streaming, row.prop_power.streaming),
                row.base_power.total, row.prop_power.total,
                reduction_pct(row.base_power.total, row.prop_power.total));
  return buf;
}

nlohmann::json row_json(const ReportRow& row, bool with_shape) {
  auto u = [](std::uint64_t v) { return static_cast<double>(v); };
  const ActivityCounters& b = row.base;
  const ActivityCounters& p = row.prop;
  nlohmann::json reductions = {
      {"input_reg", reduction_pct(u(b.input_reg_toggles), u(p.input_reg_toggles))},
      {"weight_reg", reduction_pct(u(b.weight_reg_toggles), u(p.weight_reg_toggles))},
      {"inv_bit", reduction_pct(u(b.inv_bit_toggles), u(p.inv_bit_toggles))},
      {"iszero_bit", reduction_pct(u(b.iszero_bit_toggles), u(p.iszero_bit_toggles))},
      {"acc", reduction_pct(u(b.acc_toggles), u(p.acc_toggles))},
      {"unload", reduction_pct(u(b.unload_toggles), u(p.unload_toggles))},
      {"macs_performed", reduction_pct(u(b.macs_performed), u(p.macs_performed))},
      {"streaming_toggles", reduction_pct(u(b.streaming_toggles()), u(p.streaming_toggles()))},
      {"streaming", reduction_pct(row.base_power.streaming, row.prop_power.streaming)},
      {"compute", reduction_pct(row.base_power.compute, row.prop_power.compute)},
      {"total", reduction_pct(row.base_power.total, row.prop_power.total)},
  };
  nlohmann::json j = {{"layer", row.layer},
                      {"zero_frac", row.zero_frac},
                      {"baseline", {{"counters", to_json(b)}, {"proxy", to_json(row.base_power)}}},
                      {"proposed", {{"counters", to_json(p)}, {"proxy", to_json(row.prop_power)}}},
                      {"reduction_pct", reductions}};
  if (with_shape) {
    j["m"] = row.m;
    j["k"] = row.k;
    j["n"] = row.n;
  }
  if (b.weight_mantissa_toggles > 0) {
    j["baseline_weight_exp_to_mant_toggle_ratio"] =
        u(b.weight_exponent_toggles) / u(b.weight_mantissa_toggles);
  }
  return j;
}

}  // namespace

std::string report_csv(const CompareReport& report) {
  std::string out =
      "layer,m,k,n,zero_frac,base_stream,prop_stream,stream_red_pct,base_total,prop_total,"
      "total_red_pct\n";
  for (const ReportRow& row : report.layers) out += csv_row(row, true);
  out += csv_row(report.overall, false);
  return out;
}

nlohmann::json report_json(const CompareReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const ReportRow& row : report.layers) layers.push_back(row_json(row, true));
  return {
      {"proxy_config", to_json(report.proxy)},
      {"proxy_units", "arbitrary; relative comparison only"},
      {"layers", layers},
      {"overall", row_json(report.overall, false)},
      // Published ASIC figures for manual side-by-side reading. They come
      // from synthesized hardware on full ImageNet runs and are not expected
      // to match a desk-scale toggle proxy.
      {"published_reference",
       {{"avg_switching_activity_reduction_pct", 29.0},
        {"per_layer_power_savings_pct", {1.0, 19.0}},
        {"overall_power_reduction_pct", {{"resnet50", 9.4}, {"mobilenet", 6.2}}}}},
  };
}

nlohmann::json to_json(const ActivityCounters& c) {
  return {{"input_reg_toggles", c.input_reg_toggles},
          {"weight_reg_toggles", c.weight_reg_toggles},
          {"inv_bit_toggles", c.inv_bit_toggles},
          {"iszero_bit_toggles", c.iszero_bit_toggles},
          {"acc_toggles", c.acc_toggles},
          {"unload_toggles", c.unload_toggles},
          {"weight_sign_toggles", c.weight_sign_toggles},
          {"weight_exponent_toggles", c.weight_exponent_toggles},
          {"weight_mantissa_toggles", c.weight_mantissa_toggles},
          {"weight_covered_toggles", c.weight_covered_toggles},
          {"macs_performed", c.macs_performed},
          {"macs_skipped", c.macs_skipped},
          {"cycles", c.cycles},
          {"unload_cycles", c.unload_cycles}};
}

ActivityCounters counters_from_json(const nlohmann::json& j) {
  ActivityCounters c;
  c.input_reg_toggles = j.at("input_reg_toggles").get<std::uint64_t>();
  c.weight_reg_toggles = j.at("weight_reg_toggles").get<std::uint64_t>();
  c.inv_bit_toggles = j.at("inv_bit_toggles").get<std::uint64_t>();
  c.iszero_bit_toggles = j.at("iszero_bit_toggles").get<std::uint64_t>();
  c.acc_toggles = j.at("acc_toggles").get<std::uint64_t>();
  c.unload_toggles = j.at("unload_toggles").get<std::uint64_t>();
  c.weight_sign_toggles = j.at("weight_sign_toggles").get<std::uint64_t>();
  c.weight_exponent_toggles = j.at("weight_exponent_toggles").get<std::uint64_t>();
  c.weight_mantissa_toggles = j.at("weight_mantissa_toggles").get<std::uint64_t>();
  c.weight_covered_toggles = j.at("weight_covered_toggles").get<std::uint64_t>();
  c.macs_performed = j.at("macs_performed").get<std::uint64_t>();
  c.macs_skipped = j.at("macs_skipped").get<std::uint64_t>();
  c.cycles = j.at("cycles").get<std::uint64_t>();
  c.unload_cycles = j.at("unload_cycles").get<std::uint64_t>();
  return c;
}

nlohmann::json to_json(const PowerProxyConfig& p) {
  return {{"input_reg", p.input_reg}, {"weight_reg", p.weight_reg}, {"inv_bit", p.inv_bit},
          {"iszero_bit", p.iszero_bit}, {"acc", p.acc},               {"unload", p.unload},
          {"e_mac", p.e_mac}};
}

PowerProxyConfig proxy_from_json(const nlohmann::json& j) {
  PowerProxyConfig p;
  p.input_reg = j.value("input_reg", p.input_reg);
  p.weight_reg = j.value("weight_reg", p.weight_reg);
  p.inv_bit = j.value("inv_bit", p.inv_bit);
  p.iszero_bit = j.value("iszero_bit", p.iszero_bit);
  p.acc = j.value("acc", p.acc);
  p.unload = j.value("unload", p.unload);
  p.e_mac = j.value("e_mac", p.e_mac);
  p.validate();
  return p;
}

nlohmann::json to_json(const PowerBreakdown& p) {
  return {{"streaming", p.streaming}, {"compute", p.compute}, {"unload", p.unload},
          {"total", p.total}};
}

nlohmann::json to_json(const FieldHistograms& h) {
  return {{"total", h.total}, {"sign", h.sign}, {"exponent", h.exponent}, {"mantissa", h.mantissa}};
}

}  // namespace satoggle
