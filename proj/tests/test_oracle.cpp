#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "pnp/diagnostics.hpp"
#include "pnp/oracle.hpp"
#include "pnp/random_fields.hpp"

using namespace pnp;

namespace {

SchemeConfig<double> config(MeanKind kind, double dt) {
  SchemeConfig<double> cfg;
  cfg.dt = dt;
  cfg.mean_kind = kind;
  cfg.species = {{"p", 1.0}, {"m", -1.0}};
  return cfg;
}

}  // namespace

TEST_CASE("dense transport matrix structure") {
  std::mt19937_64 rng(41);
  for (int dim : {1, 2}) {
    const Grid g(dim, 8, 0, 1);
    for (auto kind : kAllMeans) {
      const auto cfg = config(kind, 0.01);
      SUBCASE("zero potential rows sum to 1/dt") {
        const auto A = oracle::dense_transport_matrix(CellFieldd(g), cfg.species[0], cfg);
        CHECK((A.matrix.rowwise().sum().array() - 1 / cfg.dt).abs().maxCoeff() < 1e-9);
      }
      const auto psi = random_field(g, rng, -3.0, 3.0);
      const auto A = oracle::dense_transport_matrix(psi, cfg.species[1], cfg);
      CHECK((A.matrix - A.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const Eigen::SelfAdjointEigenSolver<oracle::Matrix<double>> es(A.matrix);
      CHECK(es.eigenvalues().minCoeff() > 0);
      bool sign_ok = true;
      for (Index i = 0; i < g.size(); ++i)
        for (Index j = 0; j < g.size(); ++j)
          if (i != j && A.matrix(i, j) > 0) sign_ok = false;
      CHECK(sign_ok);
      // diagonally dominant: the off-diagonal row sum is bounded by the diagonal
      const Vector<double> off = A.matrix.diagonal() - A.matrix.rowwise().sum();
      CHECK((A.matrix.diagonal() - off).minCoeff() > 0);
    }
  }
}

TEST_CASE("matrix-free operator matches the dense one") {
  std::mt19937_64 rng(42);
  for (int dim : {1, 2, 3}) {
    const Grid g(dim, dim == 3 ? 4 : 8, 0, 1);
    for (auto kind : kAllMeans)
      for (int trial = 0; trial < 5; ++trial) {
        const auto cfg = config(kind, 1e-2);
        const auto psi = random_field(g, rng, -5.0, 5.0);
        CHECK(oracle::transport_apply_deviation(psi, cfg.species[trial % 2], cfg) <= 1e-13);
      }
  }
}

TEST_CASE("dense step conserves mass and positivity") {
  std::mt19937_64 rng(43);
  const Grid g(2, 8, 0, 1);
  for (auto kind : kAllMeans) {
    auto cfg = config(kind, 0.1);
    State<double> s{random_field(g, rng, -2.0, 2.0), {random_field(g, rng, 0.01, 1.0), random_field(g, rng, 0.01, 1.0)}, 0};
    const double shift = mean(s.c[0]) - mean(s.c[1]);
    cfg.fixed_charge = [g, shift](double) { return CellFieldd::constant(g, -shift); };
    const auto next = oracle::dense_step(s, cfg);
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(total_mass(next.c[l]) == doctest::Approx(total_mass(s.c[l])).epsilon(1e-12));
      CHECK(next.c[l].values().minCoeff() > 0);
    }
    CHECK(std::abs(mean(next.psi)) < 1e-14);
  }
}

TEST_CASE("dense Poisson agrees with the iterative solver") {
  std::mt19937_64 rng(44);
  for (int dim : {1, 2}) {
    const Grid g(dim, 8, 0, 1);
    auto rhs = random_field(g, rng, -1.0, 1.0);
    rhs = rhs - CellFieldd::constant(g, mean(rhs));
    const auto dense = oracle::dense_poisson_solve(rhs, 0.7);
    const auto cg = solve_poisson(PoissonProblem<double>{0.7, rhs}, 1e-13);
    CHECK((dense.values() - cg.values()).cwiseAbs().maxCoeff() < 1e-10);
    const auto A = oracle::dense_poisson_matrix(g, 0.7);
    CHECK(((A * dense).values() - rhs.values()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("size cap") {
  const Grid g(2, 65, 0, 1);
  const auto cfg = config(MeanKind::Harmonic, 0.1);
  CHECK_THROWS_AS(oracle::dense_transport_matrix(CellFieldd(g), cfg.species[0], cfg), InvalidArgument);
  CHECK_THROWS_AS(oracle::dense_poisson_matrix(g, 1.0), InvalidArgument);
}
