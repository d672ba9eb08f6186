#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "satoggle/analysis.hpp"
#include "satoggle/cli.hpp"
#include "satoggle/workload.hpp"

using namespace satoggle;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("satoggle_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sa-toggle");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

constexpr const char* kSmall = "kind=gaussian,sigma=0.05,z=0.4,layers=2,m=20,k=24,n=18";

}  // namespace

TEST_CASE("bad arguments exit 2 and write nothing") {
  TempDir dir;
  const std::string out = dir / "out";
  const std::vector<std::vector<std::string>> cases = {
      {"simulate", "--synth", kSmall, "--rows", "0", "--out", out},
      {"simulate", "--synth", kSmall, "--segments", "0:7,3:2", "--out", out},
      {"simulate", "--synth", kSmall, "--acc-mode", "fp8", "--out", out},
      {"simulate", "--synth", kSmall, "--preset", "turbo", "--out", out},
      {"simulate", "--synth", kSmall, "--format", "xml", "--out", out},
      {"simulate", "--synth", "z=3", "--out", out},
      {"simulate", "--synth", kSmall, "--manifest", dir / "m.json", "--out", out},
      {"simulate", "--out", out},
      {"simulate", "--synth", kSmall, "--bogus", "--out", out},
      {"synth", "--spec", "kind=cauchy", "--out", out},
      {"frobnicate"},
  };
  for (const auto& args : cases) {
    CAPTURE(args[0]);
    CHECK(cli(args).code == kExitBadArguments);
    CHECK_FALSE(fs::exists(out));
  }
}

TEST_CASE("missing workload files exit 3") {
  TempDir dir;
  CHECK(cli({"simulate", "--manifest", dir / "nope.json", "--out", dir / "o"}).code ==
        kExitWorkloadIo);
  CHECK_FALSE(fs::exists(dir / "o"));
  CHECK(cli({"analyze", "--manifest", dir / "nope.json", "--out", dir / "a"}).code ==
        kExitWorkloadIo);
  CHECK(cli({"compare", "--baseline", dir / "x", "--proposed", dir / "y", "--out", dir / "c"})
            .code == kExitWorkloadIo);
}

TEST_CASE("synth defaults then simulate writes a consistent run") {
  TempDir dir;
  REQUIRE(cli({"synth", "--out", dir / "model"}).code == kExitOk);
  REQUIRE(fs::exists(dir / "model/manifest.json"));

  REQUIRE(cli({"simulate", "--manifest", dir / "model/manifest.json", "--preset", "paper",
               "--out", dir / "run"})
              .code == kExitOk);
  const auto run = read_json(dir / "run/run.json");
  CHECK(run["array"]["bic"] == true);
  CHECK(run["array"]["zvcg"] == true);
  CHECK(run["array"]["segments"] == "0:7");
  REQUIRE(run["layers"].size() == 4);
  std::uint64_t macs = 0;
  for (const auto& l : run["layers"]) {
    const auto& c = l["counters"];
    const std::uint64_t mkn = l["m"].get<std::uint64_t>() * l["k"].get<std::uint64_t>() *
                              l["n"].get<std::uint64_t>();
    CHECK(c["macs_performed"].get<std::uint64_t>() + c["macs_skipped"].get<std::uint64_t>() == mkn);
    macs += mkn;
    CHECK(fs::file_size(dir.path / "run" / l["output"].get<std::string>()) ==
          2 * l["m"].get<std::uint64_t>() * l["n"].get<std::uint64_t>());
  }
  const auto& t = run["totals"]["counters"];
  CHECK(t["macs_performed"].get<std::uint64_t>() + t["macs_skipped"].get<std::uint64_t>() == macs);
  CHECK(fs::exists(dir / "run/counters.csv"));
}

TEST_CASE("simulate output matches the library tiling driver") {
  TempDir dir;
  REQUIRE(cli({"simulate", "--synth", kSmall, "--seed", "5", "--rows", "8", "--cols", "8",
               "--k-tile", "10", "--bic", "--out", dir / "run", "--format", "json"})
              .code == kExitOk);
  CHECK_FALSE(fs::exists(dir / "run/counters.csv"));
  const auto layers = synth_model(parse_synth_spec(kSmall), 5);
  ArrayConfig cfg;
  cfg.rows = 8;
  cfg.cols = 8;
  cfg.k_tile = 10;
  cfg.enable_bic = true;
  const auto run = read_json(dir / "run/run.json");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto expected = tile_and_run(layers[l], cfg);
    const auto& lj = run["layers"][l];
    CHECK(counters_from_json(lj["counters"]) == expected.counters);
    CHECK(load_tensor(dir.path / "run" / lj["output"].get<std::string>(), expected.c.rows(),
                      expected.c.cols()) == expected.c);
  }
}

TEST_CASE("same seed gives byte-identical outputs") {
  TempDir dir;
  for (const char* name : {"a", "b"}) {
    REQUIRE(cli({"simulate", "--synth", kSmall, "--seed", "11", "--preset", "paper", "--out",
                 dir / name})
                .code == kExitOk);
  }
  CHECK(slurp(dir / "a/run.json") == slurp(dir / "b/run.json"));
  CHECK(slurp(dir / "a/counters.csv") == slurp(dir / "b/counters.csv"));
  CHECK(slurp(dir / "a/layer0.out.bf16") == slurp(dir / "b/layer0.out.bf16"));

  REQUIRE(cli({"simulate", "--synth", kSmall, "--seed", "12", "--out", dir / "c"}).code == kExitOk);
  CHECK(slurp(dir / "a/layer0.out.bf16") != slurp(dir / "c/layer0.out.bf16"));
}

TEST_CASE("gating only: skips equal the zero count times N") {
  TempDir dir;
  const std::string spec = "kind=zero-fraction,z=0.5,layers=2,m=30,k=33,n=20";
  REQUIRE(cli({"simulate", "--synth", spec, "--zvcg", "--out", dir / "run"}).code == kExitOk);
  const auto layers = synth_model(parse_synth_spec(spec), 1);
  const auto run = read_json(dir / "run/run.json");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::uint64_t zeros = 0;
    for (Bf16 v : layers[l].inputs.values()) zeros += v.is_zero() ? 1 : 0;
    CHECK(run["layers"][l]["counters"]["macs_skipped"].get<std::uint64_t>() == zeros * 20);
    CHECK(run["layers"][l]["counters"]["inv_bit_toggles"].get<std::uint64_t>() == 0);
  }
}

TEST_CASE("analyze writes histograms") {
  TempDir dir;
  REQUIRE(cli({"synth", "--spec", kSmall, "--out", dir / "model"}).code == kExitOk);
  REQUIRE(cli({"analyze", "--manifest", dir / "model/manifest.json", "--out", dir / "an"}).code ==
          kExitOk);
  const auto a = read_json(dir / "an/analysis.json");
  REQUIRE(a["layers"].size() == 2);
  CHECK(a["layers"][0]["inputs"]["histograms"]["total"] == 20 * 24);
  CHECK(a["layers"][0]["weights"]["histograms"]["total"] == 24 * 18);
  CHECK(slurp(dir / "an/histograms.csv").rfind("layer,tensor,field,bin,count\n", 0) == 0);
}

TEST_CASE("compare pipeline") {
  TempDir dir;
  REQUIRE(cli({"simulate", "--synth", kSmall, "--out", dir / "base"}).code == kExitOk);
  REQUIRE(cli({"simulate", "--synth", kSmall, "--preset", "paper", "--out", dir / "prop"}).code ==
          kExitOk);
  std::ofstream(dir / "proxy.json") << R"({"e_mac": 10, "acc": 0.5})";
  REQUIRE(cli({"compare", "--baseline", dir / "base", "--proposed", dir / "prop", "--proxy-config",
               dir / "proxy.json", "--out", dir / "cmp"})
              .code == kExitOk);
  const auto report = read_json(dir / "cmp/report.json");
  CHECK(report["proxy_config"]["e_mac"] == 10.0);
  CHECK(report["proxy_config"]["acc"] == 0.5);
  for (const auto& l : report["layers"]) {
    CHECK(l["reduction_pct"]["streaming"].get<double>() > 0.0);
  }
  CHECK(fs::exists(dir / "cmp/report.csv"));

  // Runs over different workloads are not comparable.
  REQUIRE(cli({"simulate", "--synth", "layers=1,m=4,k=4,n=4", "--out", dir / "other"}).code ==
          kExitOk);
  CHECK(cli({"compare", "--baseline", dir / "base", "--proposed", dir / "other", "--out",
             dir / "bad"})
            .code == kExitWorkloadIo);

  std::ofstream(dir / "neg.json") << R"({"unload": -1})";
  CHECK(cli({"compare", "--baseline", dir / "base", "--proposed", dir / "prop", "--proxy-config",
             dir / "neg.json", "--out", dir / "neg"})
            .code == kExitBadArguments);
  CHECK_FALSE(fs::exists(dir / "neg"));
}
