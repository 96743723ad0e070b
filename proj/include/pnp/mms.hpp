#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "pnp/diagnostics.hpp"
#include "pnp/transport.hpp"

namespace pnp {

/// Exact periodic solution (c^l_e, psi_e) of the forced 2-D system together
/// with the sources f_l and the time-dependent fixed charge that make it
/// exact.
template <typename Scalar>
struct ManufacturedCase {
  using Fn = std::function<Scalar(Scalar x, Scalar y, Scalar t)>;

  Scalar kappa = 1;
  Scalar lower = 0;
  Scalar upper = 1;
  std::vector<Species<Scalar>> species;
  std::vector<Fn> exact_c;
  Fn exact_psi;
  std::vector<Fn> source;
  Fn fixed_charge;
};

/**
 * Two monovalent species on (0,1)^2 with
 *
 *   c^1 = c^2 = phi + 2,  psi = phi,  phi = e^{-t} cos(2 pi x) sin(2 pi y).
 *
 * Since Lap phi = -8 pi^2 phi and the species coincide, the fixed charge is
 * 8 pi^2 kappa phi and
 *
 *   f_q = (8 pi^2 - 1) phi - q (|grad phi|^2 - 8 pi^2 (phi + 2) phi).
 */
template <typename Scalar>
ManufacturedCase<Scalar> build_trig_case(Scalar kappa = 1) {
  using std::cos, std::sin, std::exp;
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr Scalar k2 = 8 * pi * pi;
  ManufacturedCase<Scalar> mc;
  mc.kappa = kappa;
  mc.species = {{"c1", Scalar(1)}, {"c2", Scalar(-1)}};
  auto phi = [](Scalar x, Scalar y, Scalar t) { return exp(-t) * cos(2 * pi * x) * sin(2 * pi * y); };
  auto conc = [phi](Scalar x, Scalar y, Scalar t) { return phi(x, y, t) + 2; };
  mc.exact_c = {conc, conc};
  mc.exact_psi = phi;
  auto source_for = [](Scalar q) {
    return [q](Scalar x, Scalar y, Scalar t) {
      const Scalar e = exp(-t);
      const Scalar p = e * cos(2 * pi * x) * sin(2 * pi * y);
      const Scalar px = -2 * pi * e * sin(2 * pi * x) * sin(2 * pi * y);
      const Scalar py = 2 * pi * e * cos(2 * pi * x) * cos(2 * pi * y);
      return (k2 - 1) * p - q * (px * px + py * py - k2 * (p + 2) * p);
    };
  };
  mc.source = {source_for(Scalar(1)), source_for(Scalar(-1))};
  mc.fixed_charge = [kappa, phi](Scalar x, Scalar y, Scalar t) { return k2 * kappa * phi(x, y, t); };
  return mc;
}

/// Spatially constant solution c^l = value, psi = 0, no sources.
template <typename Scalar>
ManufacturedCase<Scalar> build_constant_case(Scalar value = 2, Scalar kappa = 1) {
  ManufacturedCase<Scalar> mc;
  mc.kappa = kappa;
  mc.species = {{"c1", Scalar(1)}, {"c2", Scalar(-1)}};
  auto conc = [value](Scalar, Scalar, Scalar) { return value; };
  auto zero = [](Scalar, Scalar, Scalar) { return Scalar(0); };
  mc.exact_c = {conc, conc};
  mc.exact_psi = zero;
  mc.source = {zero, zero};
  mc.fixed_charge = zero;
  return mc;
}

template <typename Scalar>
CellField<Scalar> sample_at(const GridSpec<Scalar>& g, const typename ManufacturedCase<Scalar>::Fn& fn, Scalar t) {
  return CellField<Scalar>::sample(g, [&](Scalar x, Scalar y, Scalar) { return fn(x, y, t); });
}

/// Exact state of the case at time t sampled at cell centers.
template <typename Scalar>
State<Scalar> exact_state(const ManufacturedCase<Scalar>& mc, const GridSpec<Scalar>& g, Scalar t) {
  State<Scalar> s{sample_at(g, mc.exact_psi, t), {}, t};
  for (const auto& f : mc.exact_c) s.c.push_back(sample_at(g, f, t));
  return s;
}

template <typename Scalar>
struct MmsResult {
  int n = 0;
  Scalar h = 0;
  /// Time step actually used (T / steps).
  Scalar dt = 0;
  int steps = 0;
  /// ||c^l - c^l_e(T)||_inf per species.
  std::vector<Scalar> err_c;
  /// ||psi - psi_e(T)||_inf.
  Scalar err_psi = 0;
  /// (dt sum_l sum_k ||e_J^{l,k}||_2^2)^{1/2}.
  Scalar err_flux = 0;
  /// sum_l ||e^l||_2 + (dt sum_l sum_k ||grad e^{l,k}||^2)^{1/2} + ||e_psi||_{H2} at T.
  Scalar err_energy_norm = 0;
};

/// Number of steps covering [0, T] with a step no larger than dt_target.
template <typename Scalar>
int step_count(Scalar T, Scalar dt_target) {
  if (!(T > 0) || !(dt_target > 0)) throw InvalidArgument("mms: T and dt must be positive");
  return static_cast<int>(std::ceil(T / dt_target - Scalar(1e-9)));
}

template <typename Scalar>
SchemeConfig<Scalar> scheme_for(const ManufacturedCase<Scalar>& mc, const GridSpec<Scalar>& g, Scalar dt,
                                MeanKind kind) {
  SchemeConfig<Scalar> cfg;
  cfg.kappa = mc.kappa;
  cfg.dt = dt;
  cfg.mean_kind = kind;
  cfg.species = mc.species;
  auto rho = mc.fixed_charge;
  cfg.fixed_charge = [g, rho](Scalar t) { return sample_at(g, rho, t); };
  return cfg;
}

/**
 * Runs the manufactured case on an n x n grid to time T.
 *
 * Concentrations start from point values of the exact solution; the initial
 * potential comes from the discrete Poisson equation. Sources and fixed
 * charge are sampled at t^{n+1}. If T/dt is not integral the step shrinks
 * to T / ceil(T/dt).
 */
template <typename Scalar>
MmsResult<Scalar> run_case(const ManufacturedCase<Scalar>& mc, int n, Scalar dt_target, Scalar T, MeanKind kind,
                           const SchemeConfig<Scalar>* tolerances = nullptr) {
  const GridSpec<Scalar> g(2, n, mc.lower, mc.upper);
  MmsResult<Scalar> r;
  r.n = n;
  r.h = g.h();
  r.steps = step_count(T, dt_target);
  r.dt = T / r.steps;
  auto cfg = scheme_for(mc, g, r.dt, kind);
  if (tolerances) {
    cfg.poisson_tol = tolerances->poisson_tol;
    cfg.transport_tol = tolerances->transport_tol;
    cfg.poisson_max_iterations = tolerances->poisson_max_iterations;
    cfg.transport_max_iterations = tolerances->transport_max_iterations;
  }

  State<Scalar> s{CellField<Scalar>(g), {}, 0};
  for (const auto& f : mc.exact_c) s.c.push_back(sample_at(g, f, Scalar(0)));
  s.psi = solve_potential(s.c, cfg, Scalar(0)).psi;

  Scalar flux_acc = 0, grad_acc = 0;
  std::vector<CellField<Scalar>> sources;
  for (int k = 0; k < r.steps; ++k) {
    const Scalar t_next = (k + 1 == r.steps) ? T : (k + 1) * r.dt;
    sources.clear();
    for (const auto& f : mc.source) sources.push_back(sample_at(g, f, t_next));
    s = step<Scalar>(s, cfg, sources);
    s.t = t_next;
    const auto ref = exact_state(mc, g, t_next);
    const auto e = error_norms(s, ref, cfg.species);
    for (const auto& se : e.species) {
      flux_acc += r.dt * se.flux_l2 * se.flux_l2;
      grad_acc += r.dt * se.grad_l2 * se.grad_l2;
    }
    if (k + 1 == r.steps) {
      Scalar l2sum = 0;
      for (const auto& se : e.species) {
        r.err_c.push_back(se.linf);
        l2sum += se.l2;
      }
      r.err_psi = e.psi_linf;
      r.err_energy_norm = l2sum + std::sqrt(grad_acc) + e.psi_h2;
    }
  }
  r.err_flux = std::sqrt(flux_acc);
  return r;
}

/// Observed order ln(e_prev/e_next) / ln(h_prev/h_next); NaN when either
/// error is at rounding level or missing.
template <typename Scalar>
Scalar observed_order(Scalar e_prev, Scalar e_next, Scalar h_prev, Scalar h_next) {
  constexpr Scalar floor = Scalar(1e-12);
  if (!(e_prev > floor) || !(e_next > floor)) return std::numeric_limits<Scalar>::quiet_NaN();
  return std::log(e_prev / e_next) / std::log(h_prev / h_next);
}

template <typename Scalar>
struct ConvergenceRow {
  MmsResult<Scalar> result;
  /// Orders relative to the previous row; NaN on the first row.
  std::vector<Scalar> ord_c;
  Scalar ord_psi = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar ord_flux = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
struct ConvergenceTable {
  MeanKind mean_kind = MeanKind::Harmonic;
  std::vector<ConvergenceRow<Scalar>> rows;
};

/// One run per n with dt = h^2 (scaled by dt_ratio) to time T.
template <typename Scalar>
ConvergenceTable<Scalar> convergence_table(const ManufacturedCase<Scalar>& mc, const std::vector<int>& n_list,
                                           MeanKind kind, Scalar T = Scalar(0.1), Scalar dt_ratio = 1,
                                           const SchemeConfig<Scalar>* tolerances = nullptr) {
  if (n_list.size() < 2) throw InvalidArgument("convergence_table: need at least two grid sizes");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw InvalidArgument("convergence_table: n list must be strictly ascending");
  ConvergenceTable<Scalar> table;
  table.mean_kind = kind;
  for (int n : n_list) {
    const Scalar h = (mc.upper - mc.lower) / n;
    ConvergenceRow<Scalar> row;
    row.result = run_case(mc, n, dt_ratio * h * h, T, kind, tolerances);
    const auto nan = std::numeric_limits<Scalar>::quiet_NaN();
    row.ord_c.assign(row.result.err_c.size(), nan);
    if (!table.rows.empty()) {
      const auto& prev = table.rows.back().result;
      for (std::size_t l = 0; l < row.ord_c.size(); ++l)
        row.ord_c[l] = observed_order(prev.err_c[l], row.result.err_c[l], prev.h, row.result.h);
      row.ord_psi = observed_order(prev.err_psi, row.result.err_psi, prev.h, row.result.h);
      row.ord_flux = observed_order(prev.err_flux, row.result.err_flux, prev.h, row.result.h);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace pnp
