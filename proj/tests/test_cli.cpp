#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "coalweb/cli.hpp"
#include "coalweb/error.hpp"
#include "coalweb/path_space.hpp"

using namespace coalweb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("coalweb_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("density example with a ten-digit law parses") {
  const auto inv = parse_cli({"density", "--law", "-1:0.3333333333,0:0.3333333334,1:0.3333333333", "--t", "2500",
                              "--width", "20000", "--trials", "50", "--seed", "7"});
  CHECK(inv.subcommand == "density_scan");
  CHECK(inv.config.kind == ExperimentKind::density_scan);
  CHECK(inv.config.ts == std::vector<double>{2500});
  CHECK(inv.config.width == 20000);
  CHECK(inv.config.trials == 50);
  CHECK(inv.config.seed == 7);
  CHECK(inv.config.law.prob_of(0) == doctest::Approx(0.3333333334));
}

TEST_CASE("etahat example resolves to the 1/sqrt(pi) reference") {
  const auto inv = parse_cli({"etahat", "--interval", "0", "1", "--t", "1", "--delta", "0.02", "--trials", "2000",
                              "--seed", "1"});
  CHECK(inv.config.deltas == std::vector<double>{0.02});
  CHECK(inv.config.a == 0.0);
  CHECK(inv.config.b == 1.0);
  CHECK(etahat_reference(inv.config.a, inv.config.b, inv.config.ts[0]) == doctest::Approx(1.0 / std::sqrt(M_PI)));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_cli({"density", "--t", "10", "--width", "100", "--seed", "1"}), CliParseError);
  CHECK_THROWS_AS(parse_cli({"density", "--law", "-1:1/2,1:0.4", "--t", "10", "--seed", "1"}), CliParseError);
  CHECK_THROWS_AS(parse_cli({"etahat", "--seed", "1", "--bogus", "3"}), CliParseError);
  CHECK_THROWS_AS(parse_cli({"etahat"}), CliParseError);  // no seed anywhere
  CHECK_THROWS_AS(parse_cli({"warp"}), CliParseError);
  CHECK_THROWS_AS(parse_cli({"oracle", "--law", "-1:1/3,0:1/3,1:1/3", "--t", "1"}), CliParseError);
  CHECK_THROWS_AS(parse_cli({"etahat", "--seed", "1", "--format", "xml"}), CliParseError);
  try {
    parse_cli({"density", "--t", "10", "--seed", "1"});
  } catch (const CliParseError& e) {
    CHECK(e.usage.find("Usage") != std::string::npos);
  }
}

TEST_CASE("seed falls back to the environment value") {
  const auto inv = parse_cli({"etahat"}, std::string("42"));
  CHECK(inv.config.seed == 42);
  CHECK(parse_cli({"etahat", "--seed", "3"}, std::string("42")).config.seed == 3);
  CHECK_THROWS_AS(parse_cli({"etahat"}, std::string("x")), CliParseError);
}

TEST_CASE("render then parse is the identity") {
  std::vector<std::vector<std::string>> cases{
      {"etahat", "--seed", "1", "--delta", "0.1", "--delta", "0.02", "--interval", "-0.5", "2"},
      {"overshoot", "--law", "-2:1/4,-1:1/4,1:1/4,2:1/4", "--seed", "9", "--level", "50", "--tolerance", "0.125"},
      {"interface_clt", "--law", "-2:0.1,-1:0.4,1:0.4,2:0.1", "--seed", "2", "--time-kind", "discrete", "--t",
       "100", "--workers", "3", "--format", "json"},
      {"fg_convergence", "--law", "-1:1/3,0:1/3,1:1/3", "--seed", "5", "--epsilon", "0.1", "--m", "3"},
      {"bm_reference", "--seed", "5", "--grid-dt", "0.001", "--out", "/tmp/x"},
      {"oracle", "--law", "-1:1/3,0:1/3,1:1/3", "--width", "5", "--t", "1"},
  };
  for (const auto& args : cases) {
    const auto inv = parse_cli(args);
    CHECK(parse_cli(render_cli(inv)) == inv);
  }
}

TEST_CASE("runs write reports and exit by verdict") {
  const auto dir = scratch("runs");
  std::string out;
  const std::vector<std::string> args{"negcorr_exact", "--law", "-1:1/3,0:1/3,1:1/3", "--width", "5", "--t", "2",
                                      "--seed", "3", "--out", dir.string()};
  CHECK(run_cli(args, &out) == kExitPass);
  CHECK(out.find("[pass]") != std::string::npos);
  const auto csv = dir / "negcorr_exact_seed3.csv";
  CHECK(fs::exists(csv));
  CHECK(fs::exists(dir / "negcorr_exact_seed3.json"));
  CHECK(fs::exists(dir / "negcorr_exact_seed3.dat"));
  const auto first = slurp(csv), first_json = slurp(dir / "negcorr_exact_seed3.json");
  CHECK(run_cli(args) == kExitPass);
  CHECK(slurp(csv) == first);
  CHECK(slurp(dir / "negcorr_exact_seed3.json") == first_json);
  fs::remove_all(dir);
}

TEST_CASE("zero tolerance fails noisy cells") {
  const auto dir = scratch("tol");
  std::string out;
  const int code = run_cli({"etahat", "--trials", "20", "--seed", "3", "--tolerance", "0", "--out", dir.string()}, &out);
  CHECK(code == kExitFail);
  CHECK(out.find("[fail]") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("usage errors write nothing, runtime guards exit 3") {
  const auto dir = scratch("usage");
  std::string err;
  CHECK(run_cli({"density", "--t", "10", "--width", "100", "--seed", "1", "--out", dir.string()}, nullptr, &err) ==
        kExitUsage);
  CHECK_FALSE(err.empty());
  CHECK_FALSE(fs::exists(dir));
  CHECK(run_cli({"density", "--law", "-1:1/3,0:1/3,1:1/3", "--t", "2500", "--width", "300", "--seed", "1", "--out",
                 dir.string()}) == kExitRuntime);
  // A regular file where the output directory should be.
  const auto file = scratch("blocker");
  std::ofstream(file) << "x";
  CHECK(run_cli({"negcorr_exact", "--law", "-1:1/3,0:1/3,1:1/3", "--seed", "1", "--out", (file / "sub").string()}) ==
        kExitRuntime);
  fs::remove(file);
}

TEST_CASE("oracle prints exact rationals") {
  std::string out;
  CHECK(run_cli({"oracle", "--law", "-1:1/3,0:1/3,1:1/3", "--width", "5", "--t", "1"}, &out) == kExitPass);
  CHECK(out.find("19/27") != std::string::npos);
}

TEST_CASE("metrics on two path-set files") {
  const auto dir = scratch("metrics");
  fs::create_directories(dir);
  {
    std::ofstream a(dir / "a.txt"), b(dir / "b.txt");
    write_path_set(a, {Path(PathKind::step, {{0.0, 0.0}}, 0.0)});
    write_path_set(b, {Path(PathKind::step, {{0.0, 1.0}}, 0.0)});
  }
  std::string out;
  CHECK(run_cli({"metrics", "--paths", (dir / "a.txt").string(), "--paths", (dir / "b.txt").string()}, &out) ==
        kExitPass);
  CHECK(out.find("hausdorff") != std::string::npos);
  CHECK(run_cli({"metrics", "--paths", (dir / "a.txt").string()}) == kExitUsage);
  fs::remove_all(dir);
}
