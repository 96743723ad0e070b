#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnp/cg.hpp"
#include "pnp/grid.hpp"
#include "pnp/mobility.hpp"
#include "pnp/poisson.hpp"

namespace pnp {

template <typename Scalar>
struct Species {
  std::string name;
  Scalar q;
};

/// Potential, one concentration per species, and simulation time.
template <typename Scalar>
struct State {
  CellField<Scalar> psi;
  std::vector<CellField<Scalar>> c;
  Scalar t = 0;
};

template <typename Scalar>
struct SchemeConfig {
  Scalar kappa = 1;
  Scalar dt = Scalar(1e-3);
  MeanKind mean_kind = MeanKind::Harmonic;
  std::vector<Species<Scalar>> species;
  Scalar poisson_tol = Scalar(1e-10);
  Scalar transport_tol = Scalar(1e-11);
  /// 0 selects 10 n^dim.
  int poisson_max_iterations = 0;
  int transport_max_iterations = 0;
  /// Fixed charge rho^f(t) at cell centers; empty means zero.
  std::function<CellField<Scalar>(Scalar)> fixed_charge;

  void validate() const {
    if (!(dt > Scalar(0))) throw InvalidArgument("scheme: dt must be positive");
    if (!(kappa > Scalar(0))) throw InvalidArgument("scheme: kappa must be positive");
    for (const auto& s : species)
      if (!std::isfinite(s.q)) throw InvalidArgument("scheme: valence of species '" + s.name + "' is not finite");
  }

  CellField<Scalar> rho_f(const GridSpec<Scalar>& g, Scalar t) const {
    if (!fixed_charge) return CellField<Scalar>(g);
    auto f = fixed_charge(t);
    detail::check_same_grid(f.spec(), g, "fixed charge");
    return f;
  }
};

template <typename Scalar>
struct StepStats {
  int transport_iterations = 0;
  int poisson_iterations = 0;
  Scalar transport_residual = 0;
  Scalar poisson_residual = 0;
};

/**
 * (w . g) / dt - div(Mf grad g).
 *
 * With w = e^{-S} at cell centers and Mf the face mobility this is the
 * Slotboom-variable form of the implicit diffusion-drift step; it is
 * symmetric positive definite.
 */
template <typename Scalar>
CellField<Scalar> apply_transport_operator(const CellField<Scalar>& w, const FaceField<Scalar>& Mf, Scalar dt,
                                           const CellField<Scalar>& g) {
  detail::check_same_grid(w.spec(), g.spec(), "apply_transport_operator");
  if (!(w.values().minCoeff() > Scalar(0))) throw DomainError("apply_transport_operator: cell weight must be positive");
  const auto lap = weighted_laplacian(Mf, g);
  return CellField<Scalar>(g.spec(), w.values().cwiseProduct(g.values()) / dt - lap.values());
}

/// Diagonal of the transport operator: w/dt + (sum of adjacent face weights)/h^2.
template <typename Scalar>
Vector<Scalar> transport_diagonal(const CellField<Scalar>& w, const FaceField<Scalar>& Mf, Scalar dt) {
  const auto& g = w.spec();
  const Scalar inv_h2 = Scalar(1) / (g.h() * g.h());
  Vector<Scalar> d = w.values() / dt;
  for (int a = 0; a < g.dim(); ++a) {
    const auto& m = Mf.component(a);
    detail::for_each_forward_pair(g, a, [&](Index k, Index kp) {
      d[k] += m[k] * inv_h2;
      d[kp] += m[k] * inv_h2;
    });
  }
  return d;
}

namespace detail {

template <typename Scalar>
void check_positive(const CellField<Scalar>& c, const std::string& what) {
  Index at = 0;
  const Scalar lo = c.values().minCoeff(&at);
  if (!(lo > Scalar(0))) {
    const auto ijk = c.spec().coords(at);
    throw PropertyViolation(what + ": non-positive concentration " + std::to_string(double(lo)) + " at cell " +
                            std::to_string(at) + " (" + std::to_string(ijk[0]) + "," + std::to_string(ijk[1]) +
                            "," + std::to_string(ijk[2]) + ")");
  }
}

}  // namespace detail

/**
 * One semi-implicit step for a single species with the potential lagged at
 * psi^n:
 *
 *   (c^{n+1} - c^n)/dt = div(e^{-q psi^n} grad(c^{n+1} e^{q psi^n})) + source.
 *
 * Solved for g = c^{n+1} e^{S}, S = q psi^n, with preconditioned CG. The
 * constant mode of g is then adjusted so that total mass matches the
 * discrete balance exactly (the exact solution of the system satisfies it;
 * the iterate only does so up to the solver tolerance).
 */
template <typename Scalar>
CellField<Scalar> step_species(const CellField<Scalar>& cn, const CellField<Scalar>& psin, const Species<Scalar>& sp,
                               const SchemeConfig<Scalar>& cfg, const CellField<Scalar>* source = nullptr,
                               StepStats<Scalar>* stats = nullptr) {
  const auto& g = cn.spec();
  detail::check_same_grid(g, psin.spec(), "step_species");
  if (source) detail::check_same_grid(g, source->spec(), "step_species source");
  detail::check_positive(cn, "step_species input '" + sp.name + "'");

  const CellField<Scalar> S(g, sp.q * psin.values());
  const CellField<Scalar> w(g, (-S.values()).array().exp().matrix());
  const auto Mf = face_mobility(S, cfg.mean_kind);
  const Scalar dt = cfg.dt;

  Vector<Scalar> rhs = cn.values() / dt;
  if (source) rhs += source->values();

  SpdSolveOptions<Scalar> opt;
  opt.tol = cfg.transport_tol;
  opt.max_iterations = cfg.transport_max_iterations > 0 ? cfg.transport_max_iterations : static_cast<int>(10 * g.size());
  opt.inv_diagonal = transport_diagonal(w, Mf, dt).cwiseInverse();
  opt.initial_guess = cn.values().cwiseQuotient(w.values());
  auto res = solve_spd<Scalar>(
      [&](const Vector<Scalar>& v) { return apply_transport_operator(w, Mf, dt, CellField<Scalar>(g, v)).values(); },
      rhs, opt);

  // sum(w g)/dt must equal sum(rhs): fix the constant mode of g.
  const Scalar target = dt * rhs.sum();
  res.x.array() += (target - w.values().dot(res.x)) / w.values().sum();

  CellField<Scalar> next(g, w.values().cwiseProduct(res.x));
  if (stats) {
    stats->transport_iterations += res.iterations;
    stats->transport_residual = std::max(stats->transport_residual, res.residual);
  }
  if (!source) detail::check_positive(next, "step_species output '" + sp.name + "'");
  return next;
}

/// Poisson update psi from concentrations and fixed charge at time t.
template <typename Scalar>
PoissonSolution<Scalar> solve_potential(const std::vector<CellField<Scalar>>& c, const SchemeConfig<Scalar>& cfg,
                                        Scalar t, const CellField<Scalar>* warm_start = nullptr) {
  if (c.size() != cfg.species.size()) throw InvalidArgument("solve_potential: species count mismatch");
  if (c.empty()) throw InvalidArgument("solve_potential: no species");
  const auto& g = c.front().spec();
  Vector<Scalar> rhs = cfg.rho_f(g, t).values();
  for (std::size_t l = 0; l < c.size(); ++l) {
    detail::check_same_grid(g, c[l].spec(), "solve_potential");
    rhs += cfg.species[l].q * c[l].values();
  }
  PoissonOptions<Scalar> opt;
  opt.tol = cfg.poisson_tol;
  opt.max_iterations = cfg.poisson_max_iterations;
  if (warm_start) opt.initial_guess = *warm_start;
  return solve_poisson(PoissonProblem<Scalar>{cfg.kappa, CellField<Scalar>(g, std::move(rhs))}, opt);
}

/**
 * Full step: every species advanced with the same lagged psi^n, then psi^{n+1}
 * from -kappa Lap_h psi = sum q c^{n+1} + rho^f(t^{n+1}).
 *
 * `sources`, when non-empty, holds one source per species evaluated at
 * t^{n+1} (manufactured solutions only).
 */
template <typename Scalar>
State<Scalar> step(const State<Scalar>& state, const SchemeConfig<Scalar>& cfg,
                   std::span<const CellField<Scalar>> sources = {}, StepStats<Scalar>* stats = nullptr) {
  cfg.validate();
  if (state.c.size() != cfg.species.size()) throw InvalidArgument("step: species count mismatch");
  if (!sources.empty() && sources.size() != cfg.species.size())
    throw InvalidArgument("step: need one source per species");
  StepStats<Scalar> local;
  State<Scalar> next{state.psi, {}, state.t + cfg.dt};
  next.c.reserve(state.c.size());
  for (std::size_t l = 0; l < state.c.size(); ++l)
    next.c.push_back(step_species(state.c[l], state.psi, cfg.species[l], cfg, sources.empty() ? nullptr : &sources[l],
                                  &local));
  auto pot = solve_potential(next.c, cfg, next.t, &state.psi);
  next.psi = std::move(pot.psi);
  local.poisson_iterations = pot.iterations;
  local.poisson_residual = pot.residual;
  if (stats) *stats = local;
  return next;
}

}  // namespace pnp
