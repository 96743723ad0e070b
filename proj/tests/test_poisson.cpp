#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "pnp/poisson.hpp"
#include "pnp/random_fields.hpp"

using namespace pnp;
using std::numbers::pi;

namespace {

CellFieldd cosine_mode(const Grid& g) {
  return CellFieldd::sample(g, [](double x, double, double) { return std::cos(2 * pi * x); });
}

double eigenvalue(const Grid& g) {
  const double h = g.h();
  return 4 / (h * h) * std::sin(pi * h) * std::sin(pi * h);
}

CellFieldd mirrored(const CellFieldd& f) {
  const auto& g = f.spec();
  Vector<double> v(g.size());
  for (Index k = 0; k < g.size(); ++k) {
    const auto c = g.coords(k);
    v[k] = f(g.n() - 1 - c[0], c[1], c[2]);
  }
  return CellFieldd(g, v);
}

}  // namespace

TEST_CASE("zero right-hand side gives the zero potential") {
  const Grid g(2, 8, 0, 1);
  const auto psi = solve_poisson(PoissonProblem<double>{1.0, CellFieldd(g)});
  CHECK(psi.values().isZero());
  CHECK(poisson_residual(psi, PoissonProblem<double>{1.0, CellFieldd(g)}) == 0.0);
}

TEST_CASE("discrete eigenmode is reproduced") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 16, 0, 1);
    const double kappa = 0.3;
    const auto mode = cosine_mode(g);
    const PoissonProblem<double> p{kappa, kappa * eigenvalue(g) * mode};
    const auto psi = solve_poisson(p, 1e-12);
    CHECK((psi.values() - mode.values()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(poisson_residual(psi, p) <= 1e-12 * norm(p.rhs, NormKind::L2));
    // constants are in the kernel
    const auto shifted = psi + CellFieldd::constant(g, 5.0);
    CHECK(poisson_residual(shifted, p) == doctest::Approx(poisson_residual(psi, p)).epsilon(1e-3));
  }
}

TEST_CASE("pseudo-inverse oracle on a random zero-mean right-hand side") {
  std::mt19937_64 rng(4);
  const Grid g(2, 8, 0, 1);
  const int n = g.n();
  const double kappa = 1.7;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n * n, n * n);
  auto id = [n](int i, int j) { return ((i + n) % n) + n * ((j + n) % n); };
  const double c = kappa / (g.h() * g.h());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      A(id(i, j), id(i, j)) = 4 * c;
      A(id(i, j), id(i + 1, j)) -= c;
      A(id(i, j), id(i - 1, j)) -= c;
      A(id(i, j), id(i, j + 1)) -= c;
      A(id(i, j), id(i, j - 1)) -= c;
    }
  const Eigen::MatrixXd pinv = A.completeOrthogonalDecomposition().pseudoInverse();
  for (int trial = 0; trial < 5; ++trial) {
    auto rhs = random_field(g, rng, -1.0, 1.0);
    rhs = rhs - CellFieldd::constant(g, mean(rhs));
    const Vector<double> ref = pinv * rhs.values();
    const auto psi = solve_poisson(PoissonProblem<double>{kappa, rhs}, 1e-13);
    CHECK((psi.values() - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("gauge, linearity and mirror symmetry") {
  std::mt19937_64 rng(8);
  const Grid g(2, 12, 0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rhs = random_smooth_field(g, rng, 2.0, 3);
    const PoissonProblem<double> p{0.5, rhs};
    const auto psi = solve_poisson(p, 1e-12);
    CHECK(std::abs(mean(psi)) <= 1e-14 * norm(psi, NormKind::Linf) + 1e-300);

    const double alpha = -3.25;
    const auto scaled = solve_poisson(PoissonProblem<double>{0.5, alpha * rhs}, 1e-12);
    CHECK((scaled.values() - alpha * psi.values()).cwiseAbs().maxCoeff() <= 1e-10 * std::abs(alpha) * norm(psi, NormKind::Linf));

    const auto mirror = solve_poisson(PoissonProblem<double>{0.5, mirrored(rhs)}, 1e-12);
    CHECK((mirror.values() - mirrored(psi).values()).cwiseAbs().maxCoeff() <= 1e-10 * norm(psi, NormKind::Linf));
  }
}

TEST_CASE("compatibility of the right-hand side") {
  const Grid g(2, 8, 0, 1);
  const auto mode = cosine_mode(g);
  SUBCASE("charged system is rejected with its mean") {
    const auto rhs = mode + CellFieldd::constant(g, 0.01);
    try {
      solve_poisson(PoissonProblem<double>{1.0, rhs});
      FAIL("expected IncompatibleRhs");
    } catch (const IncompatibleRhs& e) {
      CHECK(e.mean() == doctest::Approx(0.01));
    }
  }
  SUBCASE("rounding-level mean is projected out") {
    const auto rhs = mode + CellFieldd::constant(g, 1e-13);
    const auto psi = solve_poisson(PoissonProblem<double>{1.0, rhs});
    CHECK(std::abs(mean(psi)) < 1e-15);
  }
  SUBCASE("bad kappa") { CHECK_THROWS_AS(solve_poisson(PoissonProblem<double>{0.0, mode}), InvalidArgument); }
}

TEST_CASE("iteration cap is reported") {
  const Grid g(2, 32, 0, 1);
  std::mt19937_64 rng(1);
  PoissonOptions<double> opt;
  opt.max_iterations = 2;
  CHECK_THROWS_AS(solve_poisson(PoissonProblem<double>{1.0, random_smooth_field(g, rng, 1.0, 4)}, opt), NonConvergence);
}
