#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "toda/cli.hpp"

namespace fs = std::filesystem;
using toda::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("toda_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors map to exit 2") {
  CHECK(call({}).code == toda::cli::kExitValidation);
  CHECK(call({"bogus"}).code == toda::cli::kExitValidation);
  CHECK(call({"--help"}).code == toda::cli::kExitOk);
  const auto dir = scratch("badrho");
  CHECK(call({"solve", "--rho", "abc", "--out", dir.string()}).code == toda::cli::kExitValidation);
}

TEST_CASE("selftest passes") {
  const auto r = call({"selftest"});
  CHECK(r.code == toda::cli::kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("solve writes a deterministic run directory") {
  const auto dir = scratch("solve");
  const std::vector<std::string> args{"solve", "--n", "16", "--rho", "6.28,6.28", "--out", dir.string()};
  auto r = call(args);
  REQUIRE(r.code == toda::cli::kExitOk);
  for (const char* f : {"manifest.json", "summary.json", "u.json", "J_history.csv", "residual_history.csv"})
    CHECK(fs::exists(dir / f));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("command") == "solve");
  CHECK(manifest.at("status") == "ok");
  const auto first = slurp(dir / "summary.json");

  CHECK(call(args).code == toda::cli::kExitValidation);
  auto forced = args;
  forced.push_back("--force");
  REQUIRE(call(forced).code == toda::cli::kExitOk);
  CHECK(slurp(dir / "summary.json") == first);

  r = call({"report", dir.string()});
  CHECK(r.code == toda::cli::kExitOk);
  CHECK(fs::exists(dir / "report.md"));
  CHECK(call({"report", dir.string()}).code == toda::cli::kExitValidation);
  CHECK(call({"report", dir.string(), "--force"}).code == toda::cli::kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("config files are strict") {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"rho": [1, 2], "grid": {"n": 16}, "colour": "red"})";
  }
  {
    std::ofstream cfg(dir / "broken.json");
    cfg << "{ not json";
  }
  CHECK(call({"solve", "--config", (dir / "bad.json").string(), "--out", (dir / "a").string()}).code ==
        toda::cli::kExitValidation);
  CHECK(call({"solve", "--config", (dir / "broken.json").string(), "--out", (dir / "b").string()}).code ==
        toda::cli::kExitValidation);
  fs::remove_all(dir);
}

TEST_CASE("report needs a run directory") {
  const auto dir = scratch("empty");
  fs::create_directories(dir);
  CHECK(call({"report", dir.string()}).code == toda::cli::kExitValidation);
  fs::remove_all(dir);
}

TEST_CASE("check-condition reports without failing") {
  auto r = call({"check-condition", "--h1", "cos-bump:1.0", "--rho2", "3.1415"});
  CHECK(r.code == toda::cli::kExitOk);
  CHECK(r.out.find("FAIL") != std::string::npos);
  r = call({"check-condition", "--h1", "const", "--rho2", "3.1415"});
  CHECK(r.code == toda::cli::kExitOk);
  CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("diagnose on a smooth field has no peak") {
  const auto dir = scratch("diag");
  REQUIRE(call({"solve", "--n", "16", "--rho", "6.28,6.28", "--out", (dir / "s").string()}).code == 0);
  CHECK(call({"diagnose", (dir / "s" / "u.json").string(), "--out", (dir / "d").string()}).code ==
        toda::cli::kExitValidation);
  fs::remove_all(dir);
}

TEST_CASE("holonomy and entire runs") {
  const auto dir = scratch("hol");
  auto r = call({"holonomy", "--profile", "symmetric", "--radii", "1", "--out", (dir / "h").string()});
  CHECK(r.code == toda::cli::kExitOk);
  CHECK(fs::exists(dir / "h" / "phases.csv"));
  r = call({"entire", "--mu", "0,0", "--out", (dir / "e").string()});
  CHECK(r.code == toda::cli::kExitOk);
  CHECK(fs::exists(dir / "e" / "profile.csv"));
  CHECK(call({"report", (dir / "e").string()}).code == toda::cli::kExitOk);
  CHECK(fs::exists(dir / "e" / "gamma_table.csv"));
  fs::remove_all(dir);
}
