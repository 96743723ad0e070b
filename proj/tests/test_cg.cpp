#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "pnp/cg.hpp"
#include "pnp/random_fields.hpp"

using namespace pnp;

TEST_CASE("identity and diagonal operators") {
  std::mt19937_64 rng(1);
  const Grid g(2, 6, 0, 1);
  const auto b = random_field(g, rng, -1.0, 1.0);
  const auto x = solve_spd([](const CellFieldd& v) { return v; }, b, 1e-14, 10);
  CHECK((x.values() - b.values()).cwiseAbs().maxCoeff() < 1e-15);

  const double dt = 0.5;
  const auto y = solve_spd([dt](const CellFieldd& v) { return (1 / dt) * v; }, b, 1e-14, 10);
  CHECK((y.values() - dt * b.values()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("zero right-hand side returns zero without iterating") {
  SpdSolveOptions<double> opt;
  const auto r = solve_spd<double>([](const Vector<double>& v) { return Vector<double>(2 * v); },
                                   Vector<double>::Zero(5), opt);
  CHECK(r.x.isZero());
  CHECK(r.iterations == 0);
}

TEST_CASE("random SPD matrix against a dense factorization") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const int n = 64;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = nd(rng);
  const Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  Vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = nd(rng);

  SpdSolveOptions<double> opt;
  opt.tol = 1e-13;
  opt.max_iterations = 500;
  opt.inv_diagonal = A.diagonal().cwiseInverse();
  const auto r = solve_spd<double>([&](const Vector<double>& v) { return Vector<double>(A * v); }, b, opt);
  const Vector<double> ref = A.llt().solve(b);
  CHECK((r.x - ref).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff());
  CHECK(r.residual <= 1e-13);
}

TEST_CASE("iteration cap raises non-convergence with the residual") {
  const int n = 50;
  Vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = 1.0 + i * i;
  SpdSolveOptions<double> opt;
  opt.tol = 1e-14;
  opt.max_iterations = 3;
  try {
    solve_spd<double>([&](const Vector<double>& v) { return Vector<double>(diag.cwiseProduct(v)); },
                      Vector<double>::Ones(n), opt);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.iterations() == 3);
    CHECK(e.residual() > 1e-14);
  }
}
