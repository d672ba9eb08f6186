// analysis.hpp - tensor statistics, activity-to-power proxy, comparison
// reports.
//
// Proxy units are arbitrary. Every report carries the PowerProxyConfig it
// was computed with and the raw counters it was computed from.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "satoggle/bf16.hpp"
#include "satoggle/systolic.hpp"

namespace satoggle {

struct FieldHistograms {
  std::array<std::uint64_t, 256> exponent{};
  std::array<std::uint64_t, 128> mantissa{};
  std::array<std::uint64_t, 2> sign{};
  std::uint64_t total = 0;
};

FieldHistograms field_histograms(std::span<const Bf16> values);

// Fraction of +0/-0 entries. An empty tensor has fraction 0.
double zero_fraction(std::span<const Bf16> values);

struct PowerProxyConfig {
  double input_reg = 1.0;
  double weight_reg = 1.0;
  double inv_bit = 1.0;
  double iszero_bit = 1.0;
  double acc = 1.0;
  double unload = 1.0;
  double e_mac = 40.0;  // one multiply + add

  // Throws std::invalid_argument on any negative weight.
  void validate() const;
  friend bool operator==(const PowerProxyConfig&, const PowerProxyConfig&) = default;
};

struct PowerBreakdown {
  double streaming = 0;
  double compute = 0;
  double unload = 0;
  double total = 0;
};

PowerBreakdown power_proxy(const ActivityCounters& c, const PowerProxyConfig& cfg);

// Result of simulating one layer, as stored in a run record.
struct LayerRun {
  std::string name;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  double zero_frac = 0;
  ActivityCounters counters;
};

struct ReportRow {
  std::string layer;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  double zero_frac = 0;
  ActivityCounters base;
  ActivityCounters prop;
  PowerBreakdown base_power;
  PowerBreakdown prop_power;
};

struct CompareReport {
  PowerProxyConfig proxy;
  std::vector<ReportRow> layers;
  ReportRow overall;  // summed counters; zero_frac weighted by m*k
};

// Percentage reduction from base to prop; 0 when base is 0.
double reduction_pct(double base, double prop);

// Layers are matched by position and must agree on name and shape.
CompareReport compare_report(const std::vector<LayerRun>& baseline,
                             const std::vector<LayerRun>& proposed,
                             const PowerProxyConfig& proxy = {});

std::string report_csv(const CompareReport& report);
nlohmann::json report_json(const CompareReport& report);

nlohmann::json to_json(const ActivityCounters& c);
ActivityCounters counters_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PowerProxyConfig& p);
PowerProxyConfig proxy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PowerBreakdown& p);
nlohmann::json to_json(const FieldHistograms& h);

}  // namespace satoggle
