#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pnp/grid.hpp"
#include "pnp/mobility.hpp"
#include "pnp/transport.hpp"

namespace pnp {

/// h^dim sum c.
template <typename Scalar>
Scalar total_mass(const CellField<Scalar>& c) {
  return c.spec().cell_volume() * c.values().sum();
}

/// How the fixed-charge term enters the discrete free energy.
enum class EnergyForm {
  /// (q c + rho^f) psi / 2 inside the species sum, so rho^f psi is counted
  /// once per species.
  PerSpecies,
  /// rho^f psi / 2 counted once, i.e. <rho, psi>/2 with rho the total charge.
  Single,
};

/// Discrete free energy sum_l h^dim sum [c log c + (q c + rho^f) psi / 2].
template <typename Scalar>
Scalar free_energy(const State<Scalar>& s, const std::vector<Species<Scalar>>& species,
                   const CellField<Scalar>& rho_f, EnergyForm form = EnergyForm::PerSpecies) {
  if (s.c.size() != species.size()) throw InvalidArgument("free_energy: species count mismatch");
  const auto& g = s.psi.spec();
  detail::check_same_grid(g, rho_f.spec(), "free_energy");
  const auto psi = s.psi.values().array();
  Scalar total = 0;
  for (std::size_t l = 0; l < species.size(); ++l) {
    detail::check_same_grid(g, s.c[l].spec(), "free_energy");
    const auto c = s.c[l].values().array();
    if (!(c.minCoeff() > Scalar(0))) throw DomainError("free_energy: concentrations must be positive");
    total += (c * c.log()).sum() + Scalar(0.5) * (species[l].q * c * psi).sum();
    if (form == EnergyForm::PerSpecies) total += Scalar(0.5) * (rho_f.values().array() * psi).sum();
  }
  if (form == EnergyForm::Single) total += Scalar(0.5) * (rho_f.values().array() * psi).sum();
  return g.cell_volume() * total;
}

/**
 * Dissipation rate
 *
 *   I^n = sum_l h^dim sum_faces e^{-S_face} D(g) D(log g),  g = c^{n+1} e^{q psi^n},
 *
 * with the face mobility of the scheme's mean kind. Each summand is
 * non-negative.
 */
template <typename Scalar>
Scalar dissipation_rate(const std::vector<CellField<Scalar>>& c_next, const CellField<Scalar>& psin,
                        const SchemeConfig<Scalar>& cfg) {
  if (c_next.size() != cfg.species.size()) throw InvalidArgument("dissipation_rate: species count mismatch");
  const auto& grid = psin.spec();
  Scalar total = 0;
  for (std::size_t l = 0; l < c_next.size(); ++l) {
    detail::check_same_grid(grid, c_next[l].spec(), "dissipation_rate");
    if (!(c_next[l].values().minCoeff() > Scalar(0)))
      throw DomainError("dissipation_rate: concentrations must be positive");
    const CellField<Scalar> S(grid, cfg.species[l].q * psin.values());
    const auto Mf = face_mobility(S, cfg.mean_kind);
    const CellField<Scalar> g(grid, c_next[l].values().cwiseProduct(S.values().array().exp().matrix()));
    const CellField<Scalar> log_g(grid, g.values().array().log().matrix());
    for (int a = 0; a < grid.dim(); ++a)
      total += (Mf.component(a).array() * diff_forward(g, a).array() * diff_forward(log_g, a).array()).sum();
  }
  return grid.cell_volume() * total;
}

/// Sufficient step bound (kappa / C1) exp(-h max|q| ||grad_h psi^n||_inf),
/// C1 = sum q^2 * max_l ||c^{l,n+1}||_inf.
template <typename Scalar>
Scalar tau_star(const std::vector<CellField<Scalar>>& c_next, const CellField<Scalar>& psin,
                const SchemeConfig<Scalar>& cfg) {
  Scalar q2 = 0, qmax = 0, cmax = 0;
  for (const auto& s : cfg.species) {
    q2 += s.q * s.q;
    qmax = std::max(qmax, std::abs(s.q));
  }
  for (const auto& c : c_next) cmax = std::max(cmax, norm(c, NormKind::Linf));
  const Scalar c1 = q2 * cmax;
  if (c1 == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar grad = face_max_abs(gradient(psin));
  return cfg.kappa / c1 * std::exp(-psin.spec().h() * qmax * grad);
}

/// Numerical flux D c + q (A c) D psi on every face.
template <typename Scalar>
FaceField<Scalar> flux(const CellField<Scalar>& c, const CellField<Scalar>& psi, Scalar q) {
  detail::check_same_grid(c.spec(), psi.spec(), "flux");
  if (q == Scalar(0)) return gradient(c);
  std::array<Vector<Scalar>, 3> comps;
  for (int a = 0; a < c.spec().dim(); ++a)
    comps[a] = diff_forward(c, a) + q * avg_forward(c, a).cwiseProduct(diff_forward(psi, a));
  return FaceField<Scalar>(c.spec(), std::move(comps));
}

template <typename Scalar>
struct SpeciesErrors {
  Scalar l2 = 0;
  Scalar linf = 0;
  /// ||grad_h e||_2, the quantity accumulated in time by the caller.
  Scalar grad_l2 = 0;
  /// ||J_numerical - J_reference||_2 over faces.
  Scalar flux_l2 = 0;
};

template <typename Scalar>
struct ErrorNorms {
  std::vector<SpeciesErrors<Scalar>> species;
  Scalar psi_l2 = 0;
  Scalar psi_linf = 0;
  Scalar psi_h2 = 0;
};

/// Single-time-level error norms of `numerical` against `reference`.
template <typename Scalar>
ErrorNorms<Scalar> error_norms(const State<Scalar>& numerical, const State<Scalar>& reference,
                               const std::vector<Species<Scalar>>& species) {
  if (numerical.c.size() != species.size() || reference.c.size() != species.size())
    throw InvalidArgument("error_norms: species count mismatch");
  detail::check_same_grid(numerical.psi.spec(), reference.psi.spec(), "error_norms");
  ErrorNorms<Scalar> out;
  const auto e_psi = reference.psi - numerical.psi;
  out.psi_l2 = norm(e_psi, NormKind::L2);
  out.psi_linf = norm(e_psi, NormKind::Linf);
  out.psi_h2 = norm(e_psi, NormKind::H2);
  for (std::size_t l = 0; l < species.size(); ++l) {
    const auto e = reference.c[l] - numerical.c[l];
    SpeciesErrors<Scalar> se;
    se.l2 = norm(e, NormKind::L2);
    se.linf = norm(e, NormKind::Linf);
    se.grad_l2 = norm(e, NormKind::GradL2);
    se.flux_l2 = face_norm(flux(reference.c[l], reference.psi, species[l].q) -
                           flux(numerical.c[l], numerical.psi, species[l].q));
    out.species.push_back(se);
  }
  return out;
}

/// Per-step monitored quantities.
template <typename Scalar>
struct StepReport {
  int step = 0;
  Scalar t = 0;
  std::vector<Scalar> mass;
  std::vector<Scalar> min_c;
  Scalar energy = 0;
  /// I^n for the step that produced this state; NaN for the initial state.
  Scalar dissipation = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar tau_star = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar poisson_residual = 0;
  int linear_iterations = 0;
};

/// Report for `next`; `prev` is the state the step started from (null for
/// the initial state).
template <typename Scalar>
StepReport<Scalar> make_report(int step_index, const State<Scalar>& next, const State<Scalar>* prev,
                               const SchemeConfig<Scalar>& cfg, EnergyForm form,
                               const StepStats<Scalar>* stats = nullptr) {
  StepReport<Scalar> r;
  r.step = step_index;
  r.t = next.t;
  for (const auto& c : next.c) {
    r.mass.push_back(total_mass(c));
    r.min_c.push_back(c.values().minCoeff());
  }
  const auto& g = next.psi.spec();
  r.energy = free_energy(next, cfg.species, cfg.rho_f(g, next.t), form);
  if (prev) {
    r.dissipation = dissipation_rate(next.c, prev->psi, cfg);
    r.tau_star = tau_star(next.c, prev->psi, cfg);
  }
  if (stats) {
    r.poisson_residual = stats->poisson_residual;
    r.linear_iterations = stats->transport_iterations + stats->poisson_iterations;
  }
  return r;
}

}  // namespace pnp
