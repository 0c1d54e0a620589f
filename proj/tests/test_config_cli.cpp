#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cellpop/config.hpp"
#include "cellpop/errors.hpp"
#include "cellpop/runner.hpp"
#include "doctest.h"

using namespace cellpop;

namespace {

const char* kWindowIni =
    "[model]\n"
    "growth = case1\n"
    "c1 = 1.0\n"
    "x_max = 1.0\n"
    "division = constant_window\n"
    "b_level = 1.0\n"
    "a_end = 2.0\n"
    "kernel = uniform\n"
    "\n"
    "[grid]\n"
    "nx = 40\n"
    "na = 121\n"
    "a_max = auto\n";

}  // namespace

TEST_CASE("ini parsing: sections, comments, lists, booleans") {
  Config c = Config::parse(
      "# leading comment\n"
      "[run]\n"
      "horizon = 12.5   ; trailing comment\n"
      "renormalize = Yes\n"
      "times = 1, 2.5, 4\n"
      "label = Mixed Case Value\n");
  CHECK(c.get_num("run", "horizon") == doctest::Approx(12.5));
  CHECK(c.get_bool("run", "renormalize", false));
  auto v = c.get_list("run", "times", {});
  REQUIRE(v.size() == 3);
  CHECK(v[1] == doctest::Approx(2.5));
  CHECK(c.get_str("run", "label") == "Mixed Case Value");
  CHECK(c.get_num("run", "absent", 7.0) == 7.0);
  CHECK_FALSE(c.has("run", "absent"));
}

TEST_CASE("missing and malformed keys name the offending entry") {
  Config c = Config::parse("[model]\ngrowth = case1\nc1 = fast\n");
  try {
    c.get_str("model", "x_max");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("model.x_max") != std::string::npos);
  }
  try {
    c.get_num("model", "c1");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("model.c1") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse("[broken\n"), config_error);
  CHECK_THROWS_AS(Config::parse("[s]\nno equals sign\n"), config_error);
}

TEST_CASE("model assembly from the ini text") {
  Config c = Config::parse(kWindowIni);
  ModelCoefficients m = build_model(c);
  CHECK(m.growth.x_max() == doctest::Approx(1.0));
  CHECK(m.division(1.0, 0.5) == doctest::Approx(1.0));
  CHECK(m.kernel.is_uniform());
  CHECK_FALSE(m.two_phase.has_value());

  Config bad = Config::parse("[model]\ngrowth = case9\n");
  CHECK_THROWS_AS(build_model(bad), config_error);
}

TEST_CASE("two-phase block is parsed into the model") {
  std::string ini = std::string(kWindowIni) +
                    "\n[twophase]\n"
                    "d1 = 0.05\n"
                    "transition = hill_in_x\n"
                    "a3 = 4\na2 = 2\ngamma2 = 5\na_bar = 18\n"
                    "alpha1 = 8\n"
                    "theta = 1\n"
                    "hill_k = 2\n";
  ModelCoefficients m = build_model(Config::parse(ini));
  REQUIRE(m.two_phase.has_value());
  CHECK(m.two_phase->d1 == doctest::Approx(0.05));
  CHECK(m.two_phase->hill_n == doctest::Approx(0.5));
  CHECK(m.two_phase->transition.sup() == doctest::Approx(4.0));
  CHECK(m.two_phase->recruitment(0.0) == doctest::Approx(8.0));
}

TEST_CASE("grid assembly: auto a_max and breakpoint alignment") {
  Config c = Config::parse(kWindowIni);
  ModelCoefficients m = build_model(c);
  // Compact support [0,2]: 6x the support end.
  CHECK(auto_a_max(m) == doctest::Approx(12.0));
  Grid g = build_grid(c, m);
  CHECK(g.nx() == 40);
  CHECK(g.na() == 121);
  // A node must land exactly on the rate jump at a = 2.
  double best = 1e9;
  for (double a : g.a) best = std::min(best, std::abs(a - 2.0));
  CHECK(best < 1e-9);
}

TEST_CASE("validate runner writes the report and the summary") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cellpop_test_validate";
  fs::remove_all(dir);
  Config c = Config::parse(kWindowIni);
  RunResult res = run_validate(c, dir.string());
  CHECK(res.summary.at("positivity_expected") == 1.0);
  CHECK(res.summary.at("kernel_zeroth_residual") < 1e-12);
  CHECK(res.summary.at("min_birth_integral") == doctest::Approx(2.0));
  bool found = false;
  for (const auto& f : res.files)
    if (f.find("validate.txt") != std::string::npos && fs::exists(f)) found = true;
  CHECK(found);
  fs::remove_all(dir);
}
