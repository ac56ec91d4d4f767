#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "blowup/cli.hpp"

namespace fs = std::filesystem;
using blowup::run_cli;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::initializer_list<std::string> args) {
  std::vector<const char*> argv = {"blowuplab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("blowuplab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"construct", "--r0", "5", "--out", scratch("bad").string()}).code == 2);
  CHECK(cli({"construct", "--variant", "sideways"}).code == 2);
  CHECK(cli({"verify", "--only", "nonsense", "--out", scratch("bad2").string()}).code == 2);
  CHECK(cli({"simulate", "--t-end", "0", "--out", scratch("bad3").string()}).code == 2);
  CHECK(cli({"simulate", "--t-start", "-0.1", "--t-end", "-0.5"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--version"}).out.find(blowup::kVersion) != std::string::npos);
}

TEST_CASE("construct writes the profile files") {
  const fs::path dir = scratch("construct");
  REQUIRE(cli({"construct", "--variant", "bounded", "--r0", "100", "--out", dir.string()}).code == 0);
  for (const char* f : {"phi.csv", "f.csv", "h.csv", "deficit.csv", "eta.csv", "summary.json"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK_FALSE(fs::exists(dir / "gamma.csv"));
  const std::string phi = slurp(dir / "phi.csv");
  CHECK(phi.rfind("r,value,derivative\r\n", 0) == 0);
  const auto summary = load(dir / "summary.json");
  CHECK(summary["manifest"]["command"] == "construct");
  CHECK(summary["manifest"]["outputs"].size() == 6);

  const fs::path q = scratch("construct_q");
  REQUIRE(cli({"construct", "--variant", "quasilinear", "--r0", "100", "--out", q.string()}).code == 0);
  CHECK(fs::exists(q / "gamma.csv"));
}

TEST_CASE("verify subset and determinism") {
  const fs::path a = scratch("verify_a"), b = scratch("verify_b");
  const std::string only = "ellipticity,max_principle,decay";
  REQUIRE(cli({"verify", "--r0", "100", "--only", only, "--seed", "3", "--out", a.string()}).code == 0);
  REQUIRE(cli({"verify", "--r0", "100", "--only", only, "--seed", "3", "--out", b.string()}).code == 0);
  for (const char* f : {"checks.csv", "ellipticity.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  auto ja = load(a / "verify.json"), jb = load(b / "verify.json");
  CHECK(ja["sections"].size() == 3);
  ja["manifest"].erase("timestamp");
  jb["manifest"].erase("timestamp");
  ja["manifest"].erase("out");
  jb["manifest"].erase("out");
  CHECK(ja == jb);

  const fs::path one = scratch("verify_one");
  REQUIRE(cli({"verify", "--only", "ellipticity", "--out", one.string()}).code == 0);
  CHECK(load(one / "verify.json")["sections"].size() == 1);
}

TEST_CASE("simulate and report") {
  const fs::path s = scratch("simulate");
  const Run r = cli({"simulate", "--r0", "10", "--nr", "512", "--t-end", "-0.001", "--out", s.string()});
  REQUIRE(r.code == 0);
  const auto j = load(s / "blowup.json");
  CHECK(j["blowup"]["lipschitz_exponent"]["slope"].get<double>() ==
        doctest::Approx(-0.5).epsilon(0.05));
  CHECK(fs::exists(s / "trajectory.csv"));

  const fs::path v = scratch("report_v");
  REQUIRE(cli({"verify", "--only", "decay", "--out", v.string()}).code == 0);
  const Run rep = cli({"report", s.string(), v.string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("lipschitz_exponent") != std::string::npos);
  CHECK(rep.out.find("decay") != std::string::npos);

  fs::copy_file(v / "verify.json", s / "copy.json");
  const Run dup = cli({"report", s.string(), v.string()});
  CHECK(dup.code == 0);
  CHECK(dup.err.find("duplicate") != std::string::npos);

  const fs::path empty = scratch("empty");
  fs::create_directories(empty);
  CHECK(cli({"report", empty.string()}).code == 2);
  CHECK(cli({"report", (empty / "missing.json").string()}).code == 2);
  CHECK(cli({"report"}).code == 2);
}
