#include <string>

#include "doctest.h"

#include "choquard/config.hpp"
#include "choquard/errors.hpp"

using namespace choquard;

namespace {

int error_line(const std::string& text) {
  try {
    apply_config(parse_config(text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("parser reads the supported value kinds") {
  const ConfigDocument d = parse_config(
      "# header\n"
      "[a]\n"
      "x = 1.5e2   # trailing\n"
      "flag = true\n"
      "name = \"a # not a comment\\n\"\n"
      "xs = [1, 2.5, -3,]\n"
      "ss = [\"p\", \"q\"]\n");
  const ConfigTable& t = d.tables.at("a");
  CHECK(std::get<double>(t.at("x").v) == 150.0);
  CHECK(t.at("x").line == 3);
  CHECK(std::get<bool>(t.at("flag").v));
  CHECK(std::get<std::string>(t.at("name").v) == "a # not a comment\n");
  CHECK(std::get<std::vector<double>>(t.at("xs").v) == std::vector<double>{1, 2.5, -3});
  CHECK(std::get<std::vector<std::string>>(t.at("ss").v) == std::vector<std::string>{"p", "q"});
}

TEST_CASE("errors carry the offending line") {
  CHECK(error_line("[problem]\nN = 4\nN = 5\n") == 3);
  CHECK(error_line("[problem]\nmu = 2\n[problem]\n") == 3);
  CHECK(error_line("[problem]\n\nbogus = 1\n") == 3);
  CHECK(error_line("[nowhere]\nx = 1\n") == 1);
  CHECK(error_line("x = 1\n") == 1);
  CHECK(error_line("[problem]\nN = \"four\"\n") == 2);
  CHECK(error_line("[problem]\nmu = 2 3\n") == 2);
  CHECK(error_line("[problem]\nmu = [1, 2\n") == 2);
  CHECK(error_line("[problem]\nbeta = 1\nbeta_ratio = 0.5\n") > 0);
  CHECK(error_line("[potential]\nkind = \"teardrop\"\n") == 2);
  CHECK(error_line("[grid]\nn = 4.5\n") == 2);
}

TEST_CASE("applied values land in the run config") {
  const RunConfig c = apply_config(parse_config(
      "[problem]\nN = 5\nmu = 1.5\nlambda = 300\nbeta_ratio = 0.25\n"
      "[potential]\nkind = \"box\"\nhalf_widths = [0.5, 0.5, 0.5, 0.5, 0.5]\n"
      "[grid]\nn = 16\nhalf_width = 1.5\n"
      "[solver]\ngrad_tol = 1e-7\n"
      "[run]\nlambdas = [10, 20]\nsnapshots = false\n"));
  CHECK(c.params.N == 5);
  CHECK(c.params.mu == 1.5);
  CHECK(c.params.lambda == 300.0);
  CHECK(c.beta_ratio.value() == 0.25);
  CHECK(c.potential.kind == WellKind::box);
  CHECK(c.n == 16);
  CHECK(c.half_width == 1.5);
  CHECK(c.solver.grad_tol == 1e-7);
  CHECK(c.lambdas == std::vector<double>{10, 20});
  CHECK_FALSE(c.snapshots);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("cross-field validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.n = 24;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.half_width = 0.9;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.radial_intervals = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig a;
  RunConfig b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.params.beta = std::nextafter(b.params.beta, 1.0);
  CHECK(config_hash(a) != config_hash(b));
  b = RunConfig{};
  b.output = "elsewhere";
  CHECK(config_hash(a) != config_hash(b));
  // comments and key order do not matter
  const RunConfig x = apply_config(parse_config("[grid]\nn = 16\nhalf_width = 3\n"));
  const RunConfig y = apply_config(parse_config("# c\n[grid]\nhalf_width = 3.0\n\nn = 16 # c\n"));
  CHECK(canonical_text(x) == canonical_text(y));
}
