#pragma once

// Dense brute-force references for small grids. Matrices are assembled entry
// by entry from the stencil, independently of the matrix-free operators.

#include <Eigen/Dense>

#include <algorithm>
#include <span>
#include <string>

#include "pnp/grid.hpp"
#include "pnp/mobility.hpp"
#include "pnp/transport.hpp"

namespace pnp::oracle {

inline constexpr Index kMaxDenseSize = 4096;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense operator on cell fields; row/column k is linear cell index k.
template <typename Scalar>
struct DenseOperator {
  GridSpec<Scalar> spec;
  Matrix<Scalar> matrix;

  CellField<Scalar> operator*(const CellField<Scalar>& f) const {
    return CellField<Scalar>(spec, matrix * f.values());
  }
};

namespace detail {

template <typename Scalar>
void check_size(const GridSpec<Scalar>& g) {
  if (g.size() > kMaxDenseSize)
    throw InvalidArgument("oracle: grid has " + std::to_string(g.size()) + " cells, dense cap is " +
                          std::to_string(kMaxDenseSize));
}

/// Adds -div(m grad .) for one face with coefficient m between cells k and kp.
template <typename Scalar>
void add_face(Matrix<Scalar>& A, Index k, Index kp, Scalar coeff) {
  A(k, k) += coeff;
  A(kp, kp) += coeff;
  A(k, kp) -= coeff;
  A(kp, k) -= coeff;
}

template <typename Scalar>
Index forward_neighbour(const GridSpec<Scalar>& g, Index k, int axis) {
  const auto c = g.coords(k);
  std::array<Index, 3> n{c[0], c[1], c[2]};
  n[axis] += 1;
  return g.index(n);
}

}  // namespace detail

/// Entrywise assembly of g -> (e^{-S} g)/dt - div(M grad g), S = q psi^n.
template <typename Scalar>
DenseOperator<Scalar> dense_transport_matrix(const CellField<Scalar>& psin, const Species<Scalar>& sp,
                                             const SchemeConfig<Scalar>& cfg) {
  const auto& g = psin.spec();
  detail::check_size(g);
  Matrix<Scalar> A = Matrix<Scalar>::Zero(g.size(), g.size());
  const Scalar inv_h2 = Scalar(1) / (g.h() * g.h());
  for (Index k = 0; k < g.size(); ++k) {
    const Scalar s = sp.q * psin[k];
    A(k, k) += std::exp(-s) / cfg.dt;
    for (int a = 0; a < g.dim(); ++a) {
      const Index kp = detail::forward_neighbour(g, k, a);
      const Scalar m = face_mean(s, sp.q * psin[kp], cfg.mean_kind);
      detail::add_face(A, k, kp, m * inv_h2);
    }
  }
  return {g, std::move(A)};
}

/// Entrywise assembly of -kappa Lap_h.
template <typename Scalar>
DenseOperator<Scalar> dense_poisson_matrix(const GridSpec<Scalar>& g, Scalar kappa) {
  detail::check_size(g);
  Matrix<Scalar> A = Matrix<Scalar>::Zero(g.size(), g.size());
  const Scalar coeff = kappa / (g.h() * g.h());
  for (Index k = 0; k < g.size(); ++k)
    for (int a = 0; a < g.dim(); ++a) detail::add_face(A, k, detail::forward_neighbour(g, k, a), coeff);
  return {g, std::move(A)};
}

/// Minimum-norm (hence zero-mean) solution of -kappa Lap_h psi = rhs through
/// the eigen-decomposition pseudo-inverse.
template <typename Scalar>
CellField<Scalar> dense_poisson_solve(const CellField<Scalar>& rhs, Scalar kappa) {
  const auto op = dense_poisson_matrix(rhs.spec(), kappa);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(op.matrix);
  const auto& lambda = es.eigenvalues();
  const Scalar cutoff = lambda.cwiseAbs().maxCoeff() * Scalar(1e-10);
  Vector<Scalar> coeffs = es.eigenvectors().transpose() * rhs.values();
  for (Index i = 0; i < coeffs.size(); ++i) coeffs[i] = std::abs(lambda[i]) > cutoff ? coeffs[i] / lambda[i] : 0;
  return CellField<Scalar>(rhs.spec(), es.eigenvectors() * coeffs);
}

/// The semi-implicit step with dense direct solves throughout.
template <typename Scalar>
State<Scalar> dense_step(const State<Scalar>& state, const SchemeConfig<Scalar>& cfg,
                         std::span<const CellField<Scalar>> sources = {}) {
  const auto& g = state.psi.spec();
  detail::check_size(g);
  State<Scalar> next{state.psi, {}, state.t + cfg.dt};
  Vector<Scalar> charge = cfg.rho_f(g, next.t).values();
  for (std::size_t l = 0; l < cfg.species.size(); ++l) {
    const auto& sp = cfg.species[l];
    const auto A = dense_transport_matrix(state.psi, sp, cfg);
    Vector<Scalar> b = state.c[l].values() / cfg.dt;
    if (!sources.empty()) b += sources[l].values();
    const Vector<Scalar> gsol = A.matrix.llt().solve(b);
    const Vector<Scalar> w = (-sp.q * state.psi.values()).array().exp().matrix();
    next.c.emplace_back(g, w.cwiseProduct(gsol));
    charge += sp.q * next.c.back().values();
  }
  next.psi = dense_poisson_solve(CellField<Scalar>(g, charge), cfg.kappa);
  return next;
}

/// Largest ||A_mf e_j - A_dense e_j||_inf / ||A_dense e_j||_inf over all basis
/// vectors e_j.
template <typename Scalar>
Scalar transport_apply_deviation(const CellField<Scalar>& psin, const Species<Scalar>& sp,
                                 const SchemeConfig<Scalar>& cfg) {
  const auto& g = psin.spec();
  const auto dense = dense_transport_matrix(psin, sp, cfg);
  const CellField<Scalar> S(g, sp.q * psin.values());
  const CellField<Scalar> w(g, (-S.values()).array().exp().matrix());
  const auto Mf = face_mobility(S, cfg.mean_kind);
  Scalar worst = 0;
  for (Index j = 0; j < g.size(); ++j) {
    Vector<Scalar> e = Vector<Scalar>::Zero(g.size());
    e[j] = 1;
    const auto mf = apply_transport_operator(w, Mf, cfg.dt, CellField<Scalar>(g, e));
    const Scalar scale = dense.matrix.col(j).cwiseAbs().maxCoeff();
    worst = std::max(worst, (mf.values() - dense.matrix.col(j)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

/// Max over fields of ||step - dense_step||_inf.
template <typename Scalar>
Scalar step_deviation(const State<Scalar>& a, const State<Scalar>& b) {
  Scalar d = (a.psi.values() - b.psi.values()).cwiseAbs().maxCoeff();
  for (std::size_t l = 0; l < a.c.size(); ++l) d = std::max(d, (a.c[l].values() - b.c[l].values()).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace pnp::oracle
