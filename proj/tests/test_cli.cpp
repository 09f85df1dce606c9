#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "holo/cli.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

using namespace holo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kData = HOLO_TEST_DATA;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "holo");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "holo_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

const char* kMountain = R"([dims]
m = 1
k = 0
n = 1
[sigma]
eps = 1
f1 = "x1"
phi1_1 = "0"
phi1_2 = "0"
[solver]
mode = mountain
)";

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(kMountain);
  const Config c = parse_config(in);
  CHECK(c.dims == Dims{1, 0, 1});
  CHECK(c.eps == 1.0);
  CHECK(c.f == std::vector<std::string>{"x1"});
  CHECK(c.phi == std::vector<std::vector<std::string>>{{"0", "0"}});
  CHECK(c.solver.mode == LoopMode::Mountain);
  CHECK(parse_numbers("1, 2.5,-3") == std::vector<double>{1, 2.5, -3});
  CHECK(parse_numbers("").empty());
  CHECK_THROWS_AS(parse_numbers("1, x"), InputError);
}

TEST_CASE("malformed configs exit with 2") {
  const std::vector<std::string> bad = {
      "[dims]\nm = 1\n",                                                     // no sigma
      "[dims]\nm = one\n[sigma]\neps = 1\nf1 = \"x1\"\n",                    // bad number
      "[dims]\nm = 1\nk = 0\nn = 1\n[sigma]\neps = 1\nf1 = \"x1 +\"\n",      // bad expression
      "[dims]\nm = 1\nk = 0\nn = 1\n[sigma]\neps = 1\nf1 = \"x1\"\ng = 2\n",  // unknown key
      "[dims]\nm = 1\nk = 0\nn = 1\n[sigma]\neps = -1\nf1 = \"x1\"\n",       // eps <= 0
      "[dims]\nm = 1\nk = 0\nn = 1\n[sigma]\neps = 1\n",                     // missing f1
      "[dims]\nm = 1\n[sigma]\neps = 1\nf1 = \"x1\"\n[solver]\nmode = sideways\n",
      "not an ini file [",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    CAPTURE(i);
    const fs::path p = write_config("bad" + std::to_string(i) + ".ini", bad[i]);
    const Run r = run({"solve", p.string(), "--out", scratch("bad_out").string()});
    CHECK(r.code == kExitInput);
    CHECK_FALSE(r.err.empty());
  }
  CHECK(run({"solve", scratch("missing.ini").string()}).code == kExitInput);
  CHECK(run({"frobnicate"}).code == kExitInput);
}

TEST_CASE("solve writes tables, coefficients and a certificate") {
  const fs::path out = scratch("mountain_out");
  fs::remove_all(out);
  const Run r = run({"solve", (fs::path(kData) / "mountain.ini").string(), "--out", out.string()});
  CHECK(r.code == kExitPass);
  for (const char* f : {"core.csv", "tube.csv", "coefficients.json", "certificate.json"})
    CHECK(fs::exists(out / f));

  std::ifstream core(out / "core.csv");
  std::string header;
  std::getline(core, header);
  CHECK(header == "x1,delta,h1");
  std::string line;
  double worst = 0.0;
  int rows = 0;
  const int N = nlohmann::json::parse(std::ifstream(out / "certificate.json"))["frequencies"][0];
  while (std::getline(core, line)) {
    double x, d, h;
    char c1, c2;
    std::istringstream(line) >> x >> c1 >> d >> c2 >> h;
    worst = std::max(worst, std::abs(d - 2 * (1 - std::cos(2 * kPi * N * x)) / (kPi * N)));
    worst = std::max(worst, std::abs(h - (x - std::sin(4 * kPi * N * x) / (4 * kPi * N))));
    ++rows;
  }
  CHECK(rows > 100);
  CHECK(worst < 1e-12);

  std::ifstream tube(out / "tube.csv");
  std::getline(tube, header);
  CHECK(header == "x1,y,f1_1");

  const nlohmann::json cert = nlohmann::json::parse(std::ifstream(out / "certificate.json"));
  CHECK(cert["schema"] == "holonomic-certificate/1");
  CHECK(cert["verdict"] == "PASS");
  const nlohmann::json coef = nlohmann::json::parse(std::ifstream(out / "coefficients.json"));
  CHECK(coef["schema"] == "holonomic-coefficients/1");
}

TEST_CASE("solve with eps = 0.5 needs at most 6 oscillations") {
  const fs::path out = scratch("mountain_half");
  const Run r = run({"solve", (fs::path(kData) / "mountain.ini").string(), "--out", out.string(), "--eps", "0.5"});
  CHECK(r.code == kExitPass);
  const nlohmann::json cert = nlohmann::json::parse(std::ifstream(out / "certificate.json"));
  CHECK(cert["frequencies"][0].get<int>() <= 6);
}

TEST_CASE("a fixed frequency that is too small gives exit code 1") {
  std::string text = kMountain;
  text += "fixed_N = 1\n";
  const fs::path p = write_config("fixed.ini", text);
  const Run r = run({"solve", p.string(), "--out", scratch("fixed_out").string(), "--eps", "0.5"});
  CHECK(r.code == kExitFail);
}

TEST_CASE("solver errors exit with 3") {
  // The base point of the loop lies outside the slice: |phi_x| is far above eps.
  std::string text = kMountain;
  text.replace(text.find("mode = mountain"), 15, "mode = synthesized\nS_cap = 1");
  const fs::path p = write_config("capped.ini", text);
  const Run r = run({"solve", p.string(), "--out", scratch("capped_out").string()});
  CHECK(r.code == kExitSolver);
  CHECK(r.err.find("solver error") != std::string::npos);
}

TEST_CASE("slice command") {
  const Run zero = run({"slice", "--lambda", "", "--psi", "", "--eps", "1"});
  CHECK(zero.code == kExitPass);
  CHECK(zero.out.find("1\t0\t1\t1\t1\ttrivial") != std::string::npos);
  const Run k = run({"slice", "--lambda", "3,4", "--psi", "0.1,0.2", "--eps", "1"});
  CHECK(k.code == kExitPass);
  CHECK(k.out.find("0.0384615") != std::string::npos);
  const Run e = run({"slice", "--lambda", "0", "--psi", "1.5", "--eps", "1"});
  CHECK(e.code == kExitPass);
  CHECK(e.out.find("slice: empty") != std::string::npos);
  CHECK(run({"slice", "--lambda", "1,x", "--psi", "0,0", "--eps", "1"}).code == kExitInput);
  CHECK(run({"slice", "--lambda", "1,2", "--psi", "0", "--eps", "1"}).code == kExitInput);
}

TEST_CASE("mesh matches the closed form of f1") {
  const fs::path obj = scratch("mesh.obj");
  const Run r = run({"mesh", (fs::path(kData) / "mountain.ini").string(), "--N", "6", "--eps", "1", "-o",
                     obj.string()});
  REQUIRE(r.code == kExitPass);
  std::ifstream in(obj);
  std::string line, object;
  int vertices = 0, faces = 0;
  double worst = 0.0;
  const int N = 6;
  while (std::getline(in, line)) {
    if (line.rfind("o ", 0) == 0) object = line.substr(2);
    if (line.rfind("f ", 0) == 0) ++faces;
    if (line.rfind("v ", 0) != 0) continue;
    ++vertices;
    double x, y, z;
    std::istringstream(line.substr(2)) >> x >> y >> z;
    double expected = x;
    if (object == "f1") {
      const double s = std::sin(2 * kPi * N * x);
      const double delta = 2 * (1 - std::cos(2 * kPi * N * x)) / (kPi * N);
      expected = x - std::sin(4 * kPi * N * x) / (4 * kPi * N) +
                 4 * (y - delta) * (1 - std::cos(4 * kPi * N * x)) * s / (1 + 16 * s * s);
    } else {
      CHECK(y == 0.0);
    }
    worst = std::max(worst, std::abs(z - expected));
  }
  CHECK(vertices == 513 * 17 + 513);
  CHECK(faces == 512 * 16);
  CHECK(worst < 1e-12);
}

TEST_CASE("zero width mesh is the core curve") {
  const fs::path obj = scratch("core.obj");
  REQUIRE(run({"mesh", (fs::path(kData) / "mountain.ini").string(), "--N", "3", "--width", "0", "--res", "64",
               "-o", obj.string()})
              .code == kExitPass);
  std::ifstream in(obj);
  std::string line;
  int f1_vertices = 0;
  bool polyline = false, in_f1 = false;
  while (std::getline(in, line)) {
    if (line == "o f1") in_f1 = true;
    if (line == "o reference") in_f1 = false;
    if (in_f1 && line.rfind("l ", 0) == 0) polyline = true;
    if (!in_f1 || line.rfind("v ", 0) != 0) continue;
    double x, y, z;
    std::istringstream(line.substr(2)) >> x >> y >> z;
    CHECK(std::abs(y - 2 * (1 - std::cos(6 * kPi * x)) / (3 * kPi)) < 1e-12);
    CHECK(std::abs(z - (x - std::sin(12 * kPi * x) / (12 * kPi))) < 1e-12);
    ++f1_vertices;
  }
  CHECK(f1_vertices == 65);
  CHECK(polyline);
}

TEST_CASE("corrugation count doubles with N") {
  std::istringstream in(kMountain);
  const Config c = parse_config(in);
  int prev = 0;
  for (int N : {2, 4, 8, 16}) {
    MeshOptions o;
    o.N = N;
    o.res = 64;
    std::ostringstream sink;
    const MeshSummary s = write_mesh(c, o, sink);
    if (prev) CHECK(s.corrugations == 2 * prev);
    prev = s.corrugations;
  }
}

TEST_CASE("mesh of higher dimensions falls back to CSV") {
  const fs::path csv = scratch("plane.csv");
  const Run r = run({"mesh", (fs::path(kData) / "plane2.ini").string(), "--N", "2", "--res", "8", "-o",
                     csv.string()});
  CHECK(r.code == kExitPass);
  CHECK(r.err.find("warning") != std::string::npos);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,y,z1,f1_1,f1_2");
}

TEST_CASE("oracle command") {
  const Run r = run({"oracle", "--seed", "3", "--trials", "3", "--samples", "20000"});
  CHECK(r.code == kExitPass);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["seed"] == 3);
  CHECK(run({"oracle", "--trials", "0"}).code == kExitInput);
}

TEST_CASE("two-direction example passes") {
  const fs::path out = scratch("plane2_out");
  const Run r = run({"solve", (fs::path(kData) / "plane2.ini").string(), "--out", out.string()});
  CHECK(r.code == kExitPass);
  const nlohmann::json coef = nlohmann::json::parse(std::ifstream(out / "coefficients.json"));
  REQUIRE(coef["directions"].size() == 2);
  CHECK(coef["directions"][1]["S"].get<double>() > 0.0);
  std::ifstream tube(out / "tube.csv");
  std::string header;
  std::getline(tube, header);
  CHECK(header == "x1,x2,y,z1,f1_1,f1_2");
}
