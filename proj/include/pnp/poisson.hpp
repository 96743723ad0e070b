#pragma once

#include <cmath>
#include <string>

#include "pnp/cg.hpp"
#include "pnp/grid.hpp"

namespace pnp {

/// -kappa Lap_h psi = rhs on a periodic grid, psi constrained to zero mean.
template <typename Scalar>
struct PoissonProblem {
  Scalar kappa;
  CellField<Scalar> rhs;
};

template <typename Scalar>
struct PoissonOptions {
  Scalar tol = Scalar(1e-10);
  /// 0 selects 10 n^dim.
  int max_iterations = 0;
  /// Largest tolerated |mean(rhs)| relative to ||rhs||_inf; below it the
  /// mean is projected out silently.
  Scalar compat_tol = Scalar(1e-10);
  /// Warm start; must live on the same grid when set.
  std::optional<CellField<Scalar>> initial_guess;
};

template <typename Scalar>
struct PoissonSolution {
  CellField<Scalar> psi;
  int iterations = 0;
  Scalar residual = 0;
};

namespace detail {

template <typename Scalar>
void remove_mean(Vector<Scalar>& v) {
  v.array() -= v.mean();
}

}  // namespace detail

template <typename Scalar>
PoissonSolution<Scalar> solve_poisson(const PoissonProblem<Scalar>& p, const PoissonOptions<Scalar>& opt) {
  const auto& g = p.rhs.spec();
  if (!(p.kappa > Scalar(0))) throw InvalidArgument("poisson: kappa must be positive");
  const Scalar m = mean(p.rhs);
  const Scalar scale = norm(p.rhs, NormKind::Linf);
  if (std::abs(m) > opt.compat_tol * scale)
    throw IncompatibleRhs("poisson: right-hand side has mean " + std::to_string(double(m)) +
                              "; periodic problem requires a neutral total charge",
                          double(m));

  SpdSolveOptions<Scalar> cg;
  cg.tol = opt.tol;
  cg.max_iterations = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(10 * g.size());
  // Jacobi for the constant-coefficient stencil is a uniform scaling.
  cg.inv_diagonal = Vector<Scalar>::Constant(g.size(), g.h() * g.h() / (2 * g.dim() * p.kappa));
  cg.project = [](Vector<Scalar>& v) { detail::remove_mean(v); };
  if (opt.initial_guess) {
    detail::check_same_grid(opt.initial_guess->spec(), g, "poisson initial guess");
    cg.initial_guess = opt.initial_guess->values();
  }
  auto apply = [&](const Vector<Scalar>& v) -> Vector<Scalar> {
    return -p.kappa * laplacian(CellField<Scalar>(g, v)).values();
  };
  auto res = solve_spd<Scalar>(apply, p.rhs.values(), cg);
  detail::remove_mean(res.x);
  return {CellField<Scalar>(g, std::move(res.x)), res.iterations, res.residual};
}

/// Zero-mean solution of -kappa Lap_h psi = rhs to relative residual `tol`.
template <typename Scalar>
CellField<Scalar> solve_poisson(const PoissonProblem<Scalar>& p, Scalar tol = Scalar(1e-10)) {
  PoissonOptions<Scalar> opt;
  opt.tol = tol;
  return solve_poisson(p, opt).psi;
}

/// ||kappa Lap_h psi + rhs||_2 in the grid norm.
template <typename Scalar>
Scalar poisson_residual(const CellField<Scalar>& psi, const PoissonProblem<Scalar>& p) {
  detail::check_same_grid(psi.spec(), p.rhs.spec(), "poisson_residual");
  return norm(p.kappa * laplacian(psi) + p.rhs, NormKind::L2);
}

}  // namespace pnp
