#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pnp/grid.hpp"

namespace pnp {

template <typename Scalar>
struct SolveResult {
  Vector<Scalar> x;
  int iterations = 0;
  /// Final true relative residual ||b - A x|| / ||b||.
  Scalar residual = 0;
};

template <typename Scalar>
struct SpdSolveOptions {
  Scalar tol = Scalar(1e-11);
  int max_iterations = 1000;
  /// Inverse diagonal for Jacobi preconditioning; empty means none.
  Vector<Scalar> inv_diagonal;
  /// Starting iterate; empty means zero.
  Vector<Scalar> initial_guess;
  /// Applied to the right-hand side and every iterate when the operator is
  /// only definite on a subspace (e.g. removing the mean).
  std::function<void(Vector<Scalar>&)> project;
};

/**
 * Preconditioned conjugate gradients for a symmetric positive (semi)definite
 * operator given as a closure y = A x.
 *
 * Convergence is judged on the recursively updated residual and then
 * confirmed against the true residual; if the two disagree the iteration
 * restarts from the current iterate. Throws NonConvergence when the
 * iteration cap is exhausted.
 */
template <typename Scalar, typename Apply>
SolveResult<Scalar> solve_spd(Apply&& apply, Vector<Scalar> b, const SpdSolveOptions<Scalar>& opt) {
  using Vec = Vector<Scalar>;
  const Index n = b.size();
  if (opt.project) opt.project(b);
  SolveResult<Scalar> out;
  const Scalar bnorm = b.norm();
  if (bnorm == Scalar(0)) {
    out.x = Vec::Zero(n);
    return out;
  }
  Vec x = opt.initial_guess.size() == n ? opt.initial_guess : Vec::Zero(n);
  if (opt.project) opt.project(x);

  auto precondition = [&](const Vec& r) -> Vec {
    Vec z = opt.inv_diagonal.size() == n ? Vec(opt.inv_diagonal.cwiseProduct(r)) : r;
    if (opt.project) opt.project(z);
    return z;
  };

  const Scalar target = opt.tol * bnorm;
  int it = 0;
  Vec Ap(n);
  while (true) {
    Vec r = b - apply(x);
    if (opt.project) opt.project(r);
    Scalar rnorm = r.norm();
    if (rnorm <= target) {
      out.x = std::move(x);
      out.iterations = it;
      out.residual = rnorm / bnorm;
      return out;
    }
    if (it >= opt.max_iterations)
      throw NonConvergence("conjugate gradients: iteration cap " + std::to_string(opt.max_iterations) +
                               " reached, relative residual " + std::to_string(double(rnorm / bnorm)),
                           double(rnorm / bnorm), it);

    Vec z = precondition(r);
    Vec p = z;
    Scalar rz = r.dot(z);
    const int restart_at = it;
    while (it < opt.max_iterations) {
      Ap = apply(p);
      const Scalar pAp = p.dot(Ap);
      if (!(pAp > Scalar(0))) break;  // breakdown: fall back to a true-residual restart
      const Scalar alpha = rz / pAp;
      x.noalias() += alpha * p;
      r.noalias() -= alpha * Ap;
      ++it;
      rnorm = r.norm();
      if (rnorm <= target) break;
      z = precondition(r);
      const Scalar rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    if (it == restart_at)
      throw NonConvergence("conjugate gradients: breakdown, operator not positive definite on the search direction",
                           double(rnorm / bnorm), it);
    if (opt.project) opt.project(x);
    // recursive residual converged (or broke down): recheck the true one
  }
}

/// CellField front end of solve_spd.
template <typename Scalar, typename Apply>
CellField<Scalar> solve_spd(Apply&& apply, const CellField<Scalar>& rhs, Scalar tol, int max_iterations) {
  SpdSolveOptions<Scalar> opt;
  opt.tol = tol;
  opt.max_iterations = max_iterations;
  const auto& g = rhs.spec();
  auto res = solve_spd<Scalar>(
      [&](const Vector<Scalar>& v) { return apply(CellField<Scalar>(g, v)).values(); }, rhs.values(), opt);
  return CellField<Scalar>(g, std::move(res.x));
}

}  // namespace pnp
