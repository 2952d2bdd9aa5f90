#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const char* binary() {
  const char* b = std::getenv("BURNVEL_BIN");
  return b ? b : "burnvel";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ebv_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

int run(const std::string& args) {
  const std::string cmd = std::string(binary()) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (std::size_t at = s.find(needle); at != std::string::npos; at = s.find(needle, at + 1)) ++n;
  return n;
}

const char* kShear = R"({"flow": {"builtin": "shear_sin"},
  "solver": {"n": 32, "method": "shear_oracle"},
  "experiment": {"n_angles": 64}})";

}  // namespace

TEST_CASE("runs are byte-for-byte reproducible across thread counts") {
  const fs::path d = scratch("determinism");
  write(d / "c.json", kShear);
  const std::string cfg = "--config " + (d / "c.json").string();
  REQUIRE(run(cfg + " --threads 1 --out " + (d / "a").string() + " level-curve") == 0);
  REQUIRE(run(cfg + " --threads 3 --out " + (d / "b").string() + " level-curve") == 0);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(d / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), d / "a");
    CHECK(slurp(e.path()) == slurp(d / "b" / rel));
  }
  CHECK(files == 4);
  for (const char* f : {"results.csv", "results.json", "flat_arcs.csv", "plots/level_curve.svg"})
    CHECK(fs::exists(d / "a" / f));
}

TEST_CASE("level-curve svg structure") {
  const fs::path d = scratch("svg");
  write(d / "c.json", kShear);
  REQUIRE(run("--config " + (d / "c.json").string() + " --out " + (d / "o").string() + " level-curve") == 0);
  const std::string s = slurp(d / "o" / "plots" / "level_curve.svg");
  CHECK(s.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg ", 0) == 0);
  CHECK(s.find("viewBox=\"-0.600000 -0.600000 1.200000 1.200000\"") != std::string::npos);
  // the curve itself, then one overlay per flat arc
  CHECK(count(s, "<polygon") == 1);
  CHECK(count(s, "<polyline") == 2);
  CHECK(s.find("<polygon") < s.find("<polyline"));
  const std::size_t a = s.find("<polygon points=\"") + 17;
  CHECK(count(s.substr(a, s.find('"', a) - a), ",") == 64);
  CHECK(s.substr(s.size() - 7) == "</svg>\n");

  const std::string csv = slurp(d / "o" / "flat_arcs.csv");
  CHECK(count(csv, "\n") == 3);
}

TEST_CASE("hbar results for the zero flow") {
  const fs::path d = scratch("hbar");
  write(d / "c.json", R"({"flow": {"builtin": "zero"}, "solver": {"n": 32},
    "experiment": {"p_list": [[1, 0], [0.6, 0.8], [0, 2]]}, "output": {"formats": ["csv"]}})");
  REQUIRE(run("--config " + (d / "c.json").string() + " --out " + (d / "o").string() + " hbar") == 0);
  const std::string csv = slurp(d / "o" / "results.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("p1,p2,method,hbar,", 0) == 0);
  for (const char* expect : {"1,0,time_marching,1,", "0.6,0.8,time_marching,1,", "0,2,time_marching,4,"}) {
    std::getline(in, line);
    CHECK(line.rfind(expect, 0) == 0);
    CHECK(line.find(",ok,") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(d / "o" / "results.json"));
  CHECK_FALSE(fs::exists(d / "o" / "plots"));
}

TEST_CASE("front snapshots") {
  const fs::path d = scratch("front");
  write(d / "c.json", R"({"flow": {"builtin": "zero"}, "solver": {"n": 32},
    "experiment": {"model": "ell1", "t_list": [0, 1], "n_angles": 32}})");
  REQUIRE(run("--config " + (d / "c.json").string() + " --out " + (d / "o").string() + " front") == 0);
  const std::string csv = slurp(d / "o" / "results.csv");
  CHECK(csv.rfind("t,x,y,provenance,u\n", 0) == 0);
  CHECK(count(csv, ",corner_fan,") > 0);
  CHECK(count(csv, ",regular,") > 0);
  CHECK(fs::exists(d / "o" / "consistency.csv"));
  CHECK(fs::exists(d / "o" / "plots" / "front.svg"));
}

TEST_CASE("configuration errors exit 2 and write nothing") {
  const fs::path d = scratch("errors");
  const fs::path out = d / "o";
  write(d / "unknown.json", R"({"flow": {"builtin": "zero"}, "solver": {"grid": 32}})");
  write(d / "builtin.json", R"({"flow": {"builtin": "vortex"}})");
  write(d / "broken.json", "{\"flow\": ");
  write(d / "angles.json", R"({"flow": {"builtin": "zero"}, "experiment": {"n_angles": 32}})");
  for (const char* f : {"unknown.json", "builtin.json", "broken.json", "missing.json"}) {
    CHECK(run("--config " + (d / f).string() + " --out " + out.string() + " hbar") == 2);
    CHECK_FALSE(fs::exists(out));
  }
  CHECK(run("--config " + (d / "angles.json").string() + " --out " + out.string() + " level-curve") == 2);
  CHECK_FALSE(fs::exists(out));
  write(d / "noshear.json", R"({"flow": {"builtin": "cellular"}})");
  CHECK(run("--config " + (d / "noshear.json").string() + " --out " + out.string() + " experiment shear") == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("exit codes") {
  const fs::path d = scratch("codes");
  write(d / "c.json", kShear);
  const std::string cfg = "--config " + (d / "c.json").string() + " --out " + (d / "o").string();
  CHECK(run("--help") == 0);
  CHECK(run(cfg) == 2);
  CHECK(run(cfg + " --bogus hbar") == 2);
  CHECK(run(cfg + " --threads 0 hbar") == 2);
  CHECK(run(cfg + " nonsense") == 2);
  CHECK(run("hbar") == 2);

  // alpha fails fast on non-convergence; hbar reports the row and succeeds
  write(d / "nc.json", R"({"flow": {"builtin": "cellular", "amplitude": 2},
    "solver": {"n": 32, "t_max": 0.001}, "experiment": {"p_list": [[1, 0.2]]}})");
  const std::string nc = "--config " + (d / "nc.json").string();
  CHECK(run(nc + " --out " + (d / "n1").string() + " alpha") == 3);
  CHECK_FALSE(fs::exists(d / "n1"));
  CHECK(run(nc + " --out " + (d / "n2").string() + " hbar") == 0);
  CHECK(slurp(d / "n2" / "results.csv").find(",nonconverged,") != std::string::npos);
}
