#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CHOQUARD_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("choquard_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("missing config file is a usage error and writes nothing") {
  const fs::path out = scratch("missing");
  CHECK(run("constants --config /nonexistent/run.toml -o " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("constants: inadmissible mu is rejected, admissible pair passes") {
  const fs::path out = scratch("constants");
  CHECK(run("constants --N 4 --mu 5 -o " + out.string()) == 2);
  CHECK_FALSE(fs::exists(out / "constants.json"));
  CHECK(run("constants --N 5 --mu 1 -o " + out.string()) == 0);
  CHECK(fs::exists(out / "constants.json"));
  CHECK(slurp(out / "constants.json").find("\"relation_ok\": true") != std::string::npos);
}

TEST_CASE("config errors exit with 2") {
  const fs::path dir = scratch("badcfg");
  fs::create_directories(dir);
  const fs::path cfg = dir / "bad.toml";
  std::ofstream(cfg) << "[problem]\nN = 4\nwhatever = 1\n";
  CHECK(run("constants --config " + cfg.string() + " -o " + (dir / "out").string()) == 2);
  CHECK(run("groundstate --n 12 -o " + (dir / "out").string()) == 2);
  CHECK(run("no-such-command") == 2);
}

TEST_CASE("validate subcommand accepts the default ball well") {
  const fs::path out = scratch("validate");
  CHECK(run("validate --well ball -o " + out.string()) == 0);
  CHECK(fs::exists(out / "validate.json"));
}

TEST_CASE("repeated runs are byte-identical") {
  const fs::path out = scratch("determinism");
  const std::string args = "bubbles --N 4 --mu 2 --intervals 4000 --eps 0.2,0.1 -o " + out.string();
  REQUIRE(run(args) == 0);
  const std::string csv = slurp(out / "bubbles.csv");
  const std::string js = slurp(out / "bubbles.json");
  fs::remove_all(out);
  REQUIRE(run(args) == 0);
  CHECK(slurp(out / "bubbles.csv") == csv);
  CHECK(slurp(out / "bubbles.json") == js);
  CHECK(csv.find("config_hash") != std::string::npos);
}

TEST_CASE("sweep-beta runs from defaults on a small grid") {
  const fs::path out = scratch("sweep_beta");
  CHECK(run("sweep-beta --n 16 -o " + out.string()) == 0);
  const std::string csv = slurp(out / "sweep_beta.csv");
  CHECK(csv.find("gap_to_grid_reference") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
