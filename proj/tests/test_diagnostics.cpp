#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "pnp/diagnostics.hpp"
#include "pnp/random_fields.hpp"

using namespace pnp;
using std::numbers::e;
using std::numbers::pi;

namespace {

SchemeConfig<double> pair_config(double kappa = 1.0) {
  SchemeConfig<double> cfg;
  cfg.kappa = kappa;
  cfg.species = {{"p", 1.0}, {"m", -1.0}};
  return cfg;
}

}  // namespace

TEST_CASE("total mass") {
  const Grid g(2, 5, 0, 2);
  CHECK(total_mass(CellFieldd::constant(g, 0.5)) == doctest::Approx(2.0));
  const Grid g1(1, 4, 0, 1);
  Vector<double> v(4);
  v << 1, 2, 3, 4;
  CHECK(total_mass(CellFieldd(g1, v)) == doctest::Approx(2.5));
}

TEST_CASE("free energy examples") {
  const Grid g(2, 6, 0, 2);
  const std::vector<Species<double>> one{{"a", 1.0}};
  const State<double> unit{CellFieldd(g), {CellFieldd::constant(g, 1.0)}, 0};
  CHECK(free_energy(unit, one, CellFieldd(g)) == doctest::Approx(0.0));
  const State<double> euler{CellFieldd(g), {CellFieldd::constant(g, e)}, 0};
  CHECK(free_energy(euler, one, CellFieldd(g)) == doctest::Approx(g.volume() * e));

  // electrostatic part: h^d sum (q c + rho) psi / 2
  const auto psi = CellFieldd::sample(g, [](double x, double, double) { return std::cos(pi * x); });
  const auto rho = CellFieldd::constant(g, -0.5);
  const State<double> charged{psi, {CellFieldd::constant(g, 1.0), CellFieldd::constant(g, 1.0)}, 0};
  const std::vector<Species<double>> two{{"a", 1.0}, {"b", 1.0}};
  const double qpsi = inner(CellFieldd::constant(g, 1.0), psi);
  const double rpsi = inner(rho, psi);
  CHECK(free_energy(charged, two, rho, EnergyForm::PerSpecies) == doctest::Approx(qpsi + rpsi).epsilon(1e-12));
  CHECK(free_energy(charged, two, rho, EnergyForm::Single) == doctest::Approx(qpsi + rpsi / 2).epsilon(1e-12));

  const State<double> bad{CellFieldd(g), {CellFieldd(g)}, 0};
  CHECK_THROWS_AS(free_energy(bad, one, CellFieldd(g)), DomainError);
}

TEST_CASE("free energy is invariant under relabelling") {
  std::mt19937_64 rng(4);
  const Grid g(2, 8, 0, 1);
  const auto psi = random_smooth_field(g, rng, 1.0);
  const auto a = random_field(g, rng, 0.1, 2.0), b = random_field(g, rng, 0.1, 2.0);
  const auto rho = random_field(g, rng, -1.0, 1.0);
  const std::vector<Species<double>> ab{{"a", 2.0}, {"b", -1.0}}, ba{{"b", -1.0}, {"a", 2.0}};
  for (auto form : {EnergyForm::PerSpecies, EnergyForm::Single}) {
    const double f1 = free_energy(State<double>{psi, {a, b}, 0}, ab, rho, form);
    const double f2 = free_energy(State<double>{psi, {b, a}, 0}, ba, rho, form);
    CHECK(f1 == doctest::Approx(f2).epsilon(1e-14));
  }
}

TEST_CASE("dissipation rate is non-negative and vanishes at equilibrium") {
  std::mt19937_64 rng(6);
  const Grid g(2, 8, 0, 1);
  for (auto kind : kAllMeans) {
    auto cfg = pair_config();
    cfg.mean_kind = kind;
    for (int trial = 0; trial < 10; ++trial) {
      const auto psi = random_field(g, rng, -4.0, 4.0);
      const std::vector<CellFieldd> c{random_field(g, rng, 1e-3, 2.0), random_field(g, rng, 1e-3, 2.0)};
      CHECK(dissipation_rate(c, psi, cfg) >= 0);
    }
    const auto psi = random_smooth_field(g, rng, 1.0);
    const std::vector<CellFieldd> eq{CellFieldd(g, (-psi.values()).array().exp().matrix()),
                                     CellFieldd(g, psi.values().array().exp().matrix())};
    CHECK(dissipation_rate(eq, psi, cfg) < 1e-20);
  }
}

TEST_CASE("tau star") {
  const Grid g(2, 8, 0, 1);
  const auto cfg = pair_config();
  const std::vector<CellFieldd> c{CellFieldd::constant(g, 2.0), CellFieldd::constant(g, 1.0)};
  CHECK(tau_star(c, CellFieldd(g), cfg) == doctest::Approx(0.25));

  // smaller as the potential gradient grows
  double prev = 0.25;
  for (double amp : {0.5, 1.0, 2.0}) {
    const auto psi = CellFieldd::sample(g, [amp](double x, double, double) { return amp * std::sin(2 * pi * x); });
    const double t = tau_star(c, psi, cfg);
    CHECK(t < prev);
    prev = t;
  }
  auto neutral = cfg;
  neutral.species = {{"n", 0.0}, {"o", 0.0}};
  CHECK(std::isinf(tau_star(c, CellFieldd(g), neutral)));
}

TEST_CASE("numerical flux") {
  std::mt19937_64 rng(10);
  const Grid g(2, 8, 0, 1);
  const auto c = random_field(g, rng, 0.1, 1.0);
  const auto psi = random_field(g, rng, -1.0, 1.0);
  SUBCASE("neutral species flux is the gradient, bitwise") {
    const auto J = flux(c, psi, 0.0);
    const auto G = gradient(c);
    for (int a = 0; a < 2; ++a) CHECK((J.component(a).array() == G.component(a).array()).all());
  }
  SUBCASE("constant concentration and potential") {
    const auto J = flux(CellFieldd::constant(g, 1.0), CellFieldd::constant(g, 3.0), 1.0);
    CHECK(face_max_abs(J) == 0.0);
  }
  SUBCASE("Boltzmann equilibrium flux is second order small") {
    double prev = 0;
    for (int n : {16, 32, 64}) {
      const Grid gn(2, n, 0, 1);
      const auto p = CellFieldd::sample(gn, [](double x, double y, double) { return std::sin(2 * pi * x) * std::cos(2 * pi * y); });
      const CellFieldd ce(gn, (-p.values()).array().exp().matrix());
      const double m = face_max_abs(flux(ce, p, 1.0));
      if (prev > 0) CHECK(std::log2(prev / m) == doctest::Approx(2.0).epsilon(0.05));
      prev = m;
    }
  }
}

TEST_CASE("error norms") {
  const Grid g(2, 8, 0, 2);
  const std::vector<Species<double>> sp{{"a", 1.0}};
  const State<double> ref{CellFieldd(g), {CellFieldd::constant(g, 1.0)}, 0};
  const auto same = error_norms(ref, ref, sp);
  CHECK(same.species[0].l2 == 0.0);
  CHECK(same.psi_h2 == 0.0);

  const State<double> off{CellFieldd::constant(g, 0.1), {CellFieldd::constant(g, 1.25)}, 0};
  const auto e = error_norms(off, ref, sp);
  CHECK(e.species[0].linf == doctest::Approx(0.25));
  CHECK(e.species[0].l2 == doctest::Approx(0.25 * 2.0));
  CHECK(e.species[0].grad_l2 == 0.0);
  CHECK(e.species[0].flux_l2 == 0.0);
  CHECK(e.psi_linf == doctest::Approx(0.1));
  CHECK(e.psi_h2 == doctest::Approx(0.1 * 2.0));
}

TEST_CASE("step report") {
  std::mt19937_64 rng(12);
  const Grid g(2, 8, 0, 1);
  auto cfg = pair_config(0.1);
  cfg.dt = 1e-3;
  State<double> s{CellFieldd(g), {random_field(g, rng, 0.5, 1.0), random_field(g, rng, 0.5, 1.0)}, 0};
  const double shift = mean(s.c[0]) - mean(s.c[1]);
  cfg.fixed_charge = [g, shift](double) { return CellFieldd::constant(g, -shift); };
  s.psi = solve_potential(s.c, cfg, 0.0).psi;
  const auto r0 = make_report(0, s, static_cast<const State<double>*>(nullptr), cfg, EnergyForm::PerSpecies);
  CHECK(std::isnan(r0.dissipation));
  StepStats<double> stats;
  const auto next = step(s, cfg, {}, &stats);
  const auto r1 = make_report(1, next, &s, cfg, EnergyForm::PerSpecies, &stats);
  CHECK(r1.dissipation >= 0);
  CHECK(r1.mass[0] == doctest::Approx(r0.mass[0]).epsilon(1e-13));
  CHECK(r1.energy <= r0.energy + 1e-10 * (1 + std::abs(r0.energy)));
  CHECK(r1.linear_iterations > 0);
}

TEST_CASE("dissipation inequality when dt is below tau star") {
  std::mt19937_64 rng(14);
  const Grid g(2, 16, 0, 1);
  for (auto kind : kAllMeans)
    for (auto form : {EnergyForm::PerSpecies, EnergyForm::Single}) {
      auto cfg = pair_config(0.05);
      cfg.mean_kind = kind;
      cfg.dt = 1e-3;
      const auto rho = random_smooth_field(g, rng, 0.5);
      cfg.fixed_charge = [rho](double) { return rho; };
      auto a = random_field(g, rng, 0.5, 1.0), b = random_field(g, rng, 0.5, 1.0);
      b = b + CellFieldd::constant(g, mean(a) - mean(b));
      State<double> s{CellFieldd(g), {a, b}, 0};
      s.psi = solve_potential(s.c, cfg, 0.0).psi;
      double F = free_energy(s, cfg.species, rho, form);
      int below = 0;
      for (int k = 0; k < 30; ++k) {
        const auto next = step(s, cfg);
        const double Fn = free_energy(next, cfg.species, rho, form);
        if (cfg.dt <= tau_star(next.c, s.psi, cfg)) {
          ++below;
          CHECK(Fn - F <= -0.5 * cfg.dt * dissipation_rate(next.c, s.psi, cfg) + 1e-10);
        }
        F = Fn;
        s = next;
      }
      CHECK(below > 0);
    }
}
