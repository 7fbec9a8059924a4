#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "memphase/io.hpp"

namespace fs = std::filesystem;
using memphase::cli::dispatch;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir(const char* name) {
  const fs::path d = fs::temp_directory_path() / "memphase_unit_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

nlohmann::json without_meta(nlohmann::json j) {
  j.erase("meta");
  return j;
}

const char* kDiskSweep = R"({
  "geometry": {"kind": "disk2d", "R": 0.5, "split": {"kind": "arcs", "alpha1": 0, "alpha2": 3.141592653589793}},
  "epsilons": [0.2, 0.1, 0.08], "q": 4,
  "box": {"lo": [-1.4, -1.4], "hi": [1.4, 1.4]}
})";

}  // namespace

TEST_CASE("version and usage") {
  const Result v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("memphase 0.1.0") != std::string::npos);
  CHECK(v.out.find("field format 1") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("limits subcommand") {
  const Result r = run({"limits", "--geometry", "sphere3d", "--R", "1", "--split", "cap", "--theta0", "1.5707963",
                        "--a1", "1", "--a2", "2"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("perimeter").get<double>() == doctest::Approx(23.6954).epsilon(1e-5));
  CHECK(j.at("line").get<double>() == doctest::Approx(22.3402).epsilon(1e-5));
  CHECK(j.at("willmore").get<double>() == doctest::Approx(142.172).epsilon(1e-5));
  CHECK(run({"limits", "--geometry", "cube"}).code == 2);
}

TEST_CASE("exit codes for configuration and I/O failures") {
  const fs::path d = workdir("codes");
  const Result bad = run({"sweep", "--config", write(d / "bad.json", "{\n \"epsilons\": [0.1,\n}").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line") != std::string::npos);
  CHECK(bad.err.find("column") != std::string::npos);
  CHECK(run({"sweep", "--config", (d / "missing.json").string()}).code == 4);
  const Result unknown = run({"sweep", "--config", write(d / "u.json", R"({"epsilonz": [0.1]})").string()});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("epsilonz") != std::string::npos);
  // An output directory that cannot be created.
  write(d / "file", "x");
  CHECK(run({"sweep", "--config", write(d / "ok.json", kDiskSweep).string(), "--output-dir", (d / "file" / "sub").string()})
            .code == 4);
  // Numerical domain: truncated profile needs epsilon < 1.
  CHECK(run({"profile", "--epsilon", "2"}).code == 3);
}

TEST_CASE("sweep outputs are reproducible across thread counts") {
  const fs::path d = workdir("sweep");
  const fs::path cfg = write(d / "sweep.json", kDiskSweep);
  REQUIRE(run({"sweep", "--config", cfg.string(), "--output-dir", (d / "t1").string(), "--threads", "1", "--svg",
               (d / "t1" / "errors.svg").string()})
              .code == 0);
  REQUIRE(run({"sweep", "--config", cfg.string(), "--output-dir", (d / "t4").string(), "--threads", "4"}).code == 0);
  CHECK(memphase::io::read_file(d / "t1" / "sweep.csv") == memphase::io::read_file(d / "t4" / "sweep.csv"));
  const auto j1 = nlohmann::json::parse(memphase::io::read_file(d / "t1" / "sweep.json"));
  const auto j4 = nlohmann::json::parse(memphase::io::read_file(d / "t4" / "sweep.json"));
  CHECK(j1.contains("meta"));
  CHECK(without_meta(j1).dump() == without_meta(j4).dump());
  const std::string svg = memphase::io::read_file(d / "t1" / "errors.svg");
  CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("recover, slice and mfpair write their reports") {
  const fs::path d = workdir("single");
  const fs::path cfg = write(d / "one.json", R"({
    "geometry": {"kind": "sphere3d", "R": 1, "split": {"kind": "cap", "theta0": 1.5707963267948966}},
    "modulus": {"a1": 1, "a2": 2}, "epsilon": 0.15, "q": 4,
    "box": {"lo": [-1.75, -1.75, -1.75], "hi": [1.75, 1.75, 1.75]}
  })");
  REQUIRE(run({"recover", "--config", cfg.string(), "--output-dir", d.string(), "--fields-out", (d / "f").string()}).code == 0);
  CHECK(fs::exists(d / "recover.json"));
  CHECK(fs::exists(d / "f" / "u.bin"));
  const Result s = run({"slice", "--config", cfg.string(), "--output-dir", d.string(), "--coarea", "--per-slice-mm",
                        "0.9428090415820634", "--levels", "4", "--density", "0,0,1", "0.5", "--surface-level", "0.9"});
  REQUIRE(s.code == 0);
  const auto sj = nlohmann::json::parse(memphase::io::read_file(d / "slice.json"));
  CHECK(sj.dump().find("coarea") != std::string::npos);
  CHECK(fs::exists(d / "surface.json"));
  REQUIRE(run({"mfpair", "--config", cfg.string(), "--output-dir", d.string()}).code == 0);
  const auto mj = nlohmann::json::parse(memphase::io::read_file(d / "mfpair.json"));
  CHECK(mj.dump().find("c1_m2") != std::string::npos);
}

TEST_CASE("flow subcommand") {
  const fs::path d = workdir("flow");
  const fs::path cfg = write(d / "flow.json", R"({
    "epsilon": 0.1, "steps": 20, "log_every": 5, "seed": 4,
    "init_u": {"kind": "disk2d", "R": 0.5},
    "init_v": {"kind": "noise", "amplitude": 0.5},
    "box": {"lo": [-1.1, -1.1], "hi": [1.1, 1.1]}
  })");
  REQUIRE(run({"flow", "--config", cfg.string(), "--output-dir", (d / "a").string(), "--threads", "1",
               "--checkpoint-every", "10", "--check-gradients"})
              .code == 0);
  REQUIRE(run({"flow", "--config", cfg.string(), "--output-dir", (d / "b").string(), "--threads", "4"}).code == 0);
  CHECK(memphase::io::read_file(d / "a" / "flow.csv") == memphase::io::read_file(d / "b" / "flow.csv"));
  CHECK(fs::exists(d / "a" / "checkpoints" / "u_step000010.json"));
  const auto j = nlohmann::json::parse(memphase::io::read_file(d / "a" / "flow.json"));
  CHECK(j.contains("gradient_check"));
}

TEST_CASE("profile dump") {
  const Result r = run({"profile", "--t-min", "-1", "--t-max", "1", "--step", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0,0") != std::string::npos);
}

TEST_CASE("selftest passes") {
  const Result r = run({"selftest"});
  CHECK(r.code == 0);
  CHECK(r.out.find("selftest passed") != std::string::npos);
}
