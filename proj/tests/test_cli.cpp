#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "socdist/cli.hpp"
#include "socdist/evaluator.hpp"

using namespace socdist;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("socdist_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::string kScenes = SOCDIST_SCENES_DIR;

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("version and help") {
    auto r = cli({"--version"});
    CHECK(r.code == 0);
    CHECK(r.out.find(kVersion) != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"run", "--help"}).code == 0);
  }

  TEST_CASE("usage errors exit 1") {
    TempDir tmp;
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    auto r = cli({"run", "--detections", tmp / "d.jsonl", "--out", tmp / "r.jsonl"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--calibration") != std::string::npos);
    CHECK(cli({"run", "--detections", "d", "--calibration", "c", "--out", "o", "--bogus"}).code == 1);

    r = cli({"run", "--detections", "d", "--calibration", "c", "--out", "o", "--threshold", "0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("threshold must be positive") != std::string::npos);

    CHECK(cli({"calibrate", "--frame", "0", "--marker-distance", "4", "--out", tmp / "c.json"}).code == 1);
    CHECK(cli({"evaluate", "--pred", "p", "--out", "o"}).code == 1);
    CHECK(cli({"run", "--detections", "d", "--calibration", "c", "--out", "o", "--config",
               "/nonexistent.conf"})
              .code == 1);
  }

  TEST_CASE("data errors exit 2 and name the input") {
    TempDir tmp;
    auto r = cli({"simulate", "--scene", tmp / "missing.json", "--out", tmp / "d", "--truth", tmp / "t"});
    CHECK(r.code == 2);
    CHECK(r.err.find("missing.json") != std::string::npos);

    std::ofstream(tmp / "bad.jsonl") << R"({"frame": 1, "w": 10, "h": 10, "dets": []})" << "\n"
                                     << R"({"frame": 0, "w": 10, "h": 10, "dets": []})" << "\n";
    CHECK(cli({"calibrate", "--bbox", "0,0,100,200", "--marker-distance", "4", "--out",
               tmp / "c.json"})
              .code == 0);
    r = cli({"run", "--detections", tmp / "bad.jsonl", "--calibration", tmp / "c.json", "--out",
             tmp / "r.jsonl"});
    CHECK(r.code == 2);
    CHECK(r.err.find("non-monotonic frame index at line 2") != std::string::npos);

    r = cli({"run", "--detections", tmp / "bad.jsonl", "--calibration", tmp / "nope.json", "--out",
             tmp / "r.jsonl"});
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.json") != std::string::npos);
  }

  TEST_CASE("simulate, calibrate, run, evaluate on a noise-free scene") {
    TempDir tmp;
    REQUIRE(cli({"simulate", "--scene", kScenes + "/threshold_straddle.json", "--seed", "7", "--out",
                 tmp / "d.jsonl", "--truth", tmp / "t.jsonl"})
                .code == 0);
    // Person 1 sits at 5 m in the first frame.
    auto r = cli({"calibrate", "--detections", tmp / "d.jsonl", "--frame", "0", "--det-index", "1",
                  "--marker-distance", "5", "--known-width", "0.5", "--out", tmp / "c.json"});
    REQUIRE(r.code == 0);
    r = cli({"run", "--detections", tmp / "d.jsonl", "--calibration", tmp / "c.json", "--overlay",
             tmp / "o.jsonl", "--out", tmp / "r.jsonl", "--verbose-pairs"});
    REQUIRE(r.code == 0);
    r = cli({"evaluate", "--pred", tmp / "r.jsonl", "--truth", tmp / "t.jsonl", "--out", tmp / "m.json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("False Alarm Rate 0.00%") != std::string::npos);
    CHECK(r.out.find("Accuracy 100.00%") != std::string::npos);
    const std::string metrics = slurp(tmp / "m.json");
    CHECK(metrics.find("\"fp\": 0") != std::string::npos);
    CHECK(metrics.find("\"fn\": 0") != std::string::npos);
    CHECK(slurp(tmp / "r.jsonl").find("\"ppm\"") != std::string::npos);
    CHECK(slurp(tmp / "o.jsonl").find("\"kind\":\"line\"") != std::string::npos);
  }

  TEST_CASE("calibrate by track id and by config precedence") {
    TempDir tmp;
    REQUIRE(cli({"simulate", "--scene", kScenes + "/two_person.json", "--out", tmp / "d.jsonl",
                 "--truth", tmp / "t.jsonl"})
                .code == 0);
    REQUIRE(cli({"calibrate", "--detections", tmp / "d.jsonl", "--frame", "10", "--track-id", "0",
                 "--marker-distance", "5", "--known-width", "0.5", "--out", tmp / "c.json"})
                .code == 0);
    CHECK(slurp(tmp / "c.json").find("\"focal_length_px\": 1000") != std::string::npos);
    CHECK(cli({"calibrate", "--detections", tmp / "d.jsonl", "--frame", "10", "--track-id", "9",
               "--marker-distance", "5", "--out", tmp / "x.json"})
              .code == 2);
    CHECK(cli({"calibrate", "--detections", tmp / "d.jsonl", "--frame", "500", "--det-index", "0",
               "--marker-distance", "5", "--out", tmp / "x.json"})
              .code == 2);

    // Config file raises the threshold; a flag lowers it again.
    std::ofstream(tmp / "c.conf") << "geometry.threshold_m = 0.5\n";
    REQUIRE(cli({"run", "--detections", tmp / "d.jsonl", "--calibration", tmp / "c.json", "--config",
                 tmp / "c.conf", "--out", tmp / "r1.jsonl"})
                .code == 0);
    CHECK(slurp(tmp / "r1.jsonl").find("\"violation\":true") == std::string::npos);
    REQUIRE(cli({"run", "--detections", tmp / "d.jsonl", "--calibration", tmp / "c.json", "--config",
                 tmp / "c.conf", "--geometry.threshold_m", "1.8", "--out", tmp / "r2.jsonl"})
                .code == 0);
    CHECK(slurp(tmp / "r2.jsonl").find("\"violation\":true") != std::string::npos);
    REQUIRE(cli({"run", "--detections", tmp / "d.jsonl", "--calibration", tmp / "c.json", "--config",
                 tmp / "c.conf", "--threshold", "1.8", "--jobs", "2", "--out", tmp / "r3.jsonl"})
                .code == 0);
    CHECK(slurp(tmp / "r3.jsonl") == slurp(tmp / "r2.jsonl"));
  }

  TEST_CASE("evaluate with hand-labelled edges") {
    TempDir tmp;
    REQUIRE(cli({"simulate", "--scene", kScenes + "/two_person.json", "--out", tmp / "d.jsonl",
                 "--truth", tmp / "t.jsonl"})
                .code == 0);
    REQUIRE(cli({"calibrate", "--bbox", "0,0,100,300", "--marker-distance", "5", "--known-width", "0.5",
                 "--out", tmp / "c.json"})
                .code == 0);
    REQUIRE(cli({"run", "--detections", tmp / "d.jsonl", "--calibration", tmp / "c.json", "--out",
                 tmp / "r.jsonl"})
                .code == 0);
    {
      std::ofstream labels(tmp / "l.jsonl");
      for (int f = 0; f < 100; ++f) {
        labels << "{\"frame\": " << f << ", \"violations\": " << (f < 50 ? "[[0, 1]]" : "[]") << "}\n";
      }
    }
    auto r = cli({"evaluate", "--pred", tmp / "r.jsonl", "--edges", tmp / "l.jsonl", "--out",
                  tmp / "m.json"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Precision 50.00%") != std::string::npos);
    CHECK(r.out.find("Recall 100.00%") != std::string::npos);
    CHECK(r.out.find("False Alarm Rate n/a") == std::string::npos);
  }
}
