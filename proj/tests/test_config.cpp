#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>

#include "pnp/config.hpp"
#include "pnp/runners.hpp"

using namespace pnp;

namespace {

const char* kPreset = R"(# quadrupole run
[run]
mode = simulate
out = quad.csv
t_end = 5

[grid]
dim = 2
n = 40

[scheme]
mean = entropic
kappa = 1e-3
dt = h/10

[fixed_charge]
kind = gaussian-quadrupole
amplitude = 1
width = 100

[species.cation]
q = 1
init = 0.1

[species.anion]
q = -1
init = 0.1
)";

template <typename F>
ConfigError config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  return ConfigError("", 0, "");
}

}  // namespace

TEST_CASE("preset is accepted") {
  const auto c = parse_config(kPreset);
  CHECK(c.mode == RunMode::Simulate);
  CHECK(c.n == 40);
  CHECK(c.mean_kind == MeanKind::Entropic);
  CHECK(c.dt.resolve(1.0 / 40) == doctest::Approx(2.5e-3));
  CHECK(c.species.size() == 2);
  CHECK(c.species[1].name == "anion");
  CHECK(c.species[1].q == -1.0);
  CHECK(c.notices.empty());
  const auto p = build_problem(c);
  CHECK(p.steps == 2000);
  CHECK(p.dt == doctest::Approx(2.5e-3));
}

TEST_CASE("step rules") {
  CHECK(StepRule::parse("h").resolve(0.1) == doctest::Approx(0.1));
  CHECK(StepRule::parse("h^2").resolve(0.1) == doctest::Approx(0.01));
  CHECK(StepRule::parse("h^2/4").resolve(0.1) == doctest::Approx(0.0025));
  CHECK(StepRule::parse("0.5*h").resolve(0.1) == doctest::Approx(0.05));
  CHECK(StepRule::parse("1e-3").resolve(0.1) == doctest::Approx(1e-3));
  CHECK_THROWS(StepRule::parse("h/"));
  CHECK_THROWS(StepRule::parse("2h"));
}

TEST_CASE("negative time step names the key and line") {
  const auto e = config_error([] { parse_config("[scheme]\nmean = harmonic\ndt = -1\n"); });
  CHECK(e.key() == "dt");
  CHECK(e.line() == 3);
  CHECK(std::string(e.what()).find("dt") != std::string::npos);
}

TEST_CASE("missing mean falls back to harmonic with a notice") {
  const auto c = parse_config("[grid]\nn = 16\n");
  CHECK(c.mean_kind == MeanKind::Harmonic);
  REQUIRE(c.notices.size() == 1);
  CHECK(c.notices[0].find("harmonic") != std::string::npos);
}

TEST_CASE("malformed input is rejected") {
  CHECK(config_error([] { parse_config("[grid]\nsize = 3\n"); }).line() == 2);
  CHECK(config_error([] { parse_config("[gird]\n"); }).line() == 1);
  CHECK(config_error([] { parse_config("[grid]\nn = 8\nn = 9\n"); }).line() == 3);
  CHECK(config_error([] { parse_config("n = 8\n"); }).key() == "n");
  CHECK(config_error([] { parse_config("[grid]\nn = eight\n"); }).key() == "n");
  CHECK(config_error([] { parse_config("[scheme]\nmean = median\n"); }).key() == "mean");
  CHECK(config_error([] { parse_config("[mms]\nn_list = 60, 50\n"); }).key() == "n_list");
  CHECK(config_error([] { parse_config("[species.x]\ninit = 0.1\n"); }).key() == "q");
  CHECK(config_error([] { parse_config("[species.x]\nq = 1\ninit = -2\n"); }).key() == "init");
}

TEST_CASE("species sections replace the defaults") {
  const auto c = parse_config("[species.na]\nq = 1\ninit = random:0.1:0.2\n[species.cl]\nq = -1\n[species.ca]\nq = 2\ninit = 0.05\n");
  REQUIRE(c.species.size() == 3);
  CHECK(c.species[0].random_init);
  CHECK(c.species[0].random_lo == doctest::Approx(0.1));
  CHECK(c.species[0].random_hi == doctest::Approx(0.2));
  CHECK(c.species[2].q == 2.0);
  CHECK(c.species[2].init == doctest::Approx(0.05));
}

TEST_CASE("mms section") {
  const auto c = parse_config("[run]\nmode = mms\n[mms]\nn_list = 10, 20\nmeans = harmonic, entropic\nt_end = 0.05\n");
  CHECK(c.mode == RunMode::Mms);
  CHECK(c.mms_n == std::vector<int>{10, 20});
  CHECK(c.mms_means == std::vector<MeanKind>{MeanKind::Harmonic, MeanKind::Entropic});
  CHECK(c.mms_t_end == doctest::Approx(0.05));
}

TEST_CASE("output columns") {
  const auto cols = simulate_columns(default_config().species);
  CHECK(cols.front() == "step");
  CHECK(std::find(cols.begin(), cols.end(), "energy") != cols.end());
  CHECK(mms_columns().size() > 5);
}
