#include "pnp/runners.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "json.hpp"
#include "pnp/diagnostics.hpp"
#include "pnp/mms.hpp"
#include "pnp/oracle.hpp"
#include "pnp/random_fields.hpp"

namespace pnp {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{:.17g}", v);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open output file '" + path + "'");
  return f;
}

nlohmann::json config_json(const RunConfig& cfg, const Problem* p) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["grid"] = {{"dim", cfg.dim}, {"n", cfg.n}, {"lower", cfg.lower}, {"upper", cfg.upper}};
  j["scheme"] = {{"mean", to_string(cfg.mean_kind)},
                 {"kappa", cfg.kappa},
                 {"dt_rule", cfg.dt.text},
                 {"poisson_tol", cfg.poisson_tol},
                 {"transport_tol", cfg.transport_tol},
                 {"energy", cfg.energy_form == EnergyForm::PerSpecies ? "per-species" : "single"}};
  j["fixed_charge"] = cfg.fixed_charge == FixedChargeKind::None ? "none" : "gaussian-quadrupole";
  for (const auto& s : cfg.species) j["species"].push_back({{"name", s.name}, {"q", s.q}});
  j["seed"] = cfg.seed;
  j["t_end"] = cfg.t_end;
  j["early_stop"] = cfg.early_stop;
  if (p) {
    j["dt"] = p->dt;
    j["steps_planned"] = p->steps;
  }
  return j;
}

void write_meta(const std::string& csv_path, nlohmann::json meta) {
  auto f = open_output(csv_path + ".meta.json");
  f << meta.dump(2) << "\n";
}

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

void print_checks(const std::vector<Check>& checks, std::ostream& log) {
  for (const auto& c : checks) log << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
}

bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace

CellField<double> gaussian_quadrupole(const GridSpec<double>& g, double amplitude, double width) {
  const double a = g.lower(), L = g.upper() - g.lower();
  const double lo = a + 0.25 * L, hi = a + 0.75 * L;
  auto bump = [width](double x, double y, double x0, double y0) {
    return std::exp(-width * ((x - x0) * (x - x0) + (y - y0) * (y - y0)));
  };
  return CellField<double>::sample(g, [&](double x, double y, double) {
    return amplitude * (-bump(x, y, lo, lo) + bump(x, y, lo, hi) + bump(x, y, hi, lo) - bump(x, y, hi, hi));
  });
}

Problem build_problem(const RunConfig& cfg) {
  GridSpec<double> g(cfg.dim, cfg.n, cfg.lower, cfg.upper);
  SchemeConfig<double> s;
  s.kappa = cfg.kappa;
  s.mean_kind = cfg.mean_kind;
  s.poisson_tol = cfg.poisson_tol;
  s.transport_tol = cfg.transport_tol;
  s.poisson_max_iterations = cfg.poisson_max_iter;
  s.transport_max_iterations = cfg.transport_max_iter;
  for (const auto& sp : cfg.species) s.species.push_back({sp.name, sp.q});
  if (cfg.fixed_charge == FixedChargeKind::GaussianQuadrupole) {
    auto rho = gaussian_quadrupole(g, cfg.charge_amplitude, cfg.charge_width);
    s.fixed_charge = [rho](double) { return rho; };
  }
  const int steps = step_count(cfg.t_end, cfg.dt.resolve(g.h()));
  s.dt = cfg.t_end / steps;

  std::mt19937_64 rng(cfg.seed);
  State<double> st{CellField<double>(g), {}, 0.0};
  for (const auto& sp : cfg.species) {
    if (sp.random_init)
      st.c.push_back(random_field(g, rng, sp.random_lo, sp.random_hi));
    else
      st.c.push_back(CellField<double>::constant(g, sp.init));
  }
  st.psi = solve_potential(st.c, s, 0.0).psi;
  return Problem{g, std::move(s), std::move(st), cfg.t_end / steps, steps};
}

std::vector<std::string> simulate_columns(const std::vector<SpeciesConfig>& species) {
  std::vector<std::string> cols = {"step", "t", "energy", "dissipation", "tau_star", "poisson_residual",
                                   "linear_iterations"};
  for (const auto& s : species) cols.push_back("mass_" + s.name);
  for (const auto& s : species) cols.push_back("min_c_" + s.name);
  return cols;
}

std::vector<std::string> mms_columns() {
  return {"mean", "h", "dt", "err_c1", "ord_c1", "err_c2", "ord_c2", "err_psi", "ord_psi"};
}

std::string resolve_output_path(const std::string& out) {
  const char* dir = std::getenv("PNP_OUTPUT_DIR");
  std::filesystem::path p(out);
  if (dir && *dir && p.is_relative()) return (std::filesystem::path(dir) / p).string();
  return out;
}

namespace {

std::string report_row(const StepReport<double>& r) {
  std::vector<std::string> f = {std::to_string(r.step), num(r.t), num(r.energy), num(r.dissipation),
                                num(r.tau_star), num(r.poisson_residual), std::to_string(r.linear_iterations)};
  for (double m : r.mass) f.push_back(num(m));
  for (double m : r.min_c) f.push_back(num(m));
  return join(f);
}

/// Consecutive-plateau counter for the early stop.
struct Plateau {
  int count = 0;
  bool update(double prev, double next) {
    count = std::abs(next - prev) < 1e-12 * (1 + std::abs(prev)) ? count + 1 : 0;
    return count >= 100;
  }
};

}  // namespace

int run_simulate(const RunConfig& cfg, std::ostream& log) {
  const auto p = build_problem(cfg);
  const auto path = resolve_output_path(cfg.out);
  auto csv = open_output(path);
  csv << join(simulate_columns(cfg.species)) << "\n";

  auto meta = config_json(cfg, &p);
  meta["columns"] = simulate_columns(cfg.species);
  meta["horizon_note"] = "t_end defaults to 5.0 with early stop after 100 plateau steps";

  State<double> s = p.initial;
  auto prev_report = make_report(0, s, static_cast<const State<double>*>(nullptr), p.scheme, cfg.energy_form);
  csv << report_row(prev_report) << "\n";
  Plateau plateau;
  int k = 0;
  try {
    for (k = 1; k <= p.steps; ++k) {
      StepStats<double> stats;
      auto next = step<double>(s, p.scheme, {}, &stats);
      const auto r = make_report(k, next, &s, p.scheme, cfg.energy_form, &stats);
      const bool stop = cfg.early_stop && plateau.update(prev_report.energy, r.energy);
      if (k % cfg.report_every == 0 || k == p.steps || stop) csv << report_row(r) << "\n";
      s = std::move(next);
      prev_report = r;
      if (stop) {
        meta["early_stopped_at_step"] = k;
        break;
      }
    }
  } catch (...) {
    csv.flush();
    meta["failed_at_step"] = k;
    write_meta(path, meta);
    throw;
  }
  meta["final_t"] = s.t;
  write_meta(path, meta);
  log << "simulate: wrote " << path << " (" << std::min(k, p.steps) << " steps, t = " << num(s.t) << ")\n";
  return kExitOk;
}

int run_mms(const RunConfig& cfg, std::ostream& log) {
  const auto mc = build_trig_case<double>(1.0);
  SchemeConfig<double> tol;
  tol.poisson_tol = cfg.poisson_tol;
  tol.transport_tol = cfg.transport_tol;
  tol.poisson_max_iterations = cfg.poisson_max_iter;
  tol.transport_max_iterations = cfg.transport_max_iter;

  const auto base = resolve_output_path(cfg.out);
  std::filesystem::path bp(base);
  const auto stem = (bp.parent_path() / bp.stem()).string();
  const auto ext = bp.has_extension() ? bp.extension().string() : std::string(".csv");

  for (MeanKind kind : cfg.mms_means) {
    std::vector<ConvergenceRow<double>> rows;
    if (cfg.mms_n.size() >= 2) {
      rows = convergence_table(mc, cfg.mms_n, kind, cfg.mms_t_end, cfg.mms_dt_ratio, &tol).rows;
    } else {
      const double h = (mc.upper - mc.lower) / cfg.mms_n[0];
      ConvergenceRow<double> row;
      row.result = run_case(mc, cfg.mms_n[0], cfg.mms_dt_ratio * h * h, cfg.mms_t_end, kind, &tol);
      row.ord_c.assign(row.result.err_c.size(), std::nan(""));
      rows.push_back(std::move(row));
    }
    const auto path = stem + "_" + to_string(kind) + ext;
    auto csv = open_output(path);
    csv << join(mms_columns()) << "\n";
    for (const auto& r : rows) {
      csv << join({to_string(kind), num(r.result.h), num(r.result.dt), num(r.result.err_c[0]), num(r.ord_c[0]),
                   num(r.result.err_c[1]), num(r.ord_c[1]), num(r.result.err_psi), num(r.ord_psi)})
          << "\n";
      log << fmt::format("{:>10} h=1/{:<4d} c1 {:.3e} ({:5.2f})  c2 {:.3e} ({:5.2f})  psi {:.3e} ({:5.2f})\n",
                         to_string(kind), r.result.n, r.result.err_c[0], r.ord_c[0], r.result.err_c[1], r.ord_c[1],
                         r.result.err_psi, r.ord_psi);
    }
    log << "mms: wrote " << path << "\n";
  }
  return kExitOk;
}

int run_properties(const RunConfig& cfg, std::ostream& log) {
  const auto p = build_problem(cfg);
  std::vector<Check> checks;

  State<double> s = p.initial;
  std::vector<double> mass0;
  for (const auto& c : s.c) mass0.push_back(total_mass(c));
  const auto rho = p.scheme.rho_f(p.grid, 0.0);
  double energy = free_energy(s, p.scheme.species, rho, cfg.energy_form);

  double worst_drift = 0, worst_rise = -INFINITY, worst_dissipation_slack = -INFINITY, min_I = INFINITY;
  double min_c = INFINITY;
  int steps_below_tau = 0, steps_done = 0;
  Check positivity{"positivity", true, ""};
  Plateau plateau;
  for (int k = 1; k <= p.steps; ++k) {
    auto next = step<double>(s, p.scheme);
    if (k == 1 && cfg.inject_fault_cell) {
      auto v = next.c[0].values();
      const long cell = *cfg.inject_fault_cell;
      if (cell < 0 || cell >= v.size()) throw ConfigError("inject_fault_cell", 0, "cell index out of range");
      v[cell] = -v[cell];
      next.c[0] = CellField<double>(p.grid, v);
    }
    try {
      for (std::size_t l = 0; l < next.c.size(); ++l)
        detail::check_positive(next.c[l], "step " + std::to_string(k) + " species '" + cfg.species[l].name + "'");
    } catch (const PropertyViolation& e) {
      positivity.pass = false;
      positivity.detail = e.what();
      steps_done = k;
      break;
    }
    for (std::size_t l = 0; l < next.c.size(); ++l) {
      worst_drift = std::max(worst_drift, std::abs(total_mass(next.c[l]) - mass0[l]) / std::abs(mass0[l]));
      min_c = std::min(min_c, next.c[l].values().minCoeff());
    }
    const double e_next = free_energy(next, p.scheme.species, rho, cfg.energy_form);
    const double I = dissipation_rate(next.c, s.psi, p.scheme);
    const double tau = tau_star(next.c, s.psi, p.scheme);
    min_I = std::min(min_I, I);
    worst_rise = std::max(worst_rise, (e_next - energy) - 1e-10 * (1 + std::abs(energy)));
    if (p.dt <= tau) {
      ++steps_below_tau;
      worst_dissipation_slack = std::max(worst_dissipation_slack, (e_next - energy) + 0.5 * p.dt * I - 1e-10);
    }
    const bool stop = cfg.early_stop && plateau.update(energy, e_next);
    energy = e_next;
    s = std::move(next);
    steps_done = k;
    if (stop) break;
  }

  checks.push_back({"mass_conservation", worst_drift <= 1e-12,
                    fmt::format("max relative drift {:.3e} (limit 1e-12) over {} steps", worst_drift, steps_done)});
  if (positivity.pass) positivity.detail = fmt::format("min concentration {:.6e}", min_c);
  checks.push_back(positivity);
  if (positivity.pass) {
    checks.push_back({"energy_non_increasing", worst_rise <= 0,
                      fmt::format("max F^(n+1) - F^n - 1e-10(1+|F^n|) = {:.3e}", worst_rise)});
    checks.push_back({"dissipation_rate_nonnegative", min_I >= 0, fmt::format("min I^n = {:.3e}", min_I)});
    checks.push_back({"dissipation_inequality", worst_dissipation_slack <= 0,
                      steps_below_tau == 0
                          ? std::string("dt exceeded tau* on every step; inequality not applicable")
                          : fmt::format("{} steps with dt <= tau*, max F^(n+1)-F^n+(dt/2)I^n-1e-10 = {:.3e}",
                                        steps_below_tau, worst_dissipation_slack)});
  }

  // randomized positivity on small grids
  std::mt19937_64 rng(cfg.seed);
  const GridSpec<double> small(2, 8, 0.0, 1.0);
  const double dts[] = {1e-3, 1e-2, 1e-1, 1.0};
  int failures = 0;
  double trial_min = INFINITY;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto c = random_field(small, rng, 1e-3, 1.0);
    const auto psi = random_smooth_field(small, rng, 4.0);
    for (MeanKind kind : kAllMeans) {
      SchemeConfig<double> sc;
      sc.mean_kind = kind;
      sc.dt = dts[t % 4];
      sc.species = {{"s", t % 2 ? 1.0 : -1.0}};
      try {
        const auto next = step_species(c, psi, sc.species[0], sc);
        trial_min = std::min(trial_min, next.values().minCoeff());
      } catch (const PropertyViolation&) {
        ++failures;
      }
    }
  }
  checks.push_back({"randomized_positivity", failures == 0,
                    fmt::format("{} trials x 4 means, {} failures, min c^(n+1) {:.3e}", cfg.trials, failures,
                                trial_min)});
  print_checks(checks, log);
  return all_pass(checks) ? kExitOk : kExitProperty;
}

int run_verify(const RunConfig& cfg, std::ostream& log) {
  std::vector<Check> checks;
  std::mt19937_64 rng(cfg.seed);
  const int n = cfg.verify_size;
  for (int dim : {1, 2}) {
    const GridSpec<double> g(dim, n, 0.0, 1.0);
    for (MeanKind kind : kAllMeans) {
      double apply_dev = 0, step_dev = 0;
      for (int trial = 0; trial < 10; ++trial) {
        SchemeConfig<double> sc;
        sc.mean_kind = kind;
        sc.dt = 1e-2;
        sc.kappa = 0.5;
        sc.species = {{"cation", 1.0}, {"anion", -1.0}};
        sc.transport_tol = 1e-13;
        sc.poisson_tol = 1e-13;
        State<double> st{random_smooth_field(g, rng, 3.0), {}, 0.0};
        st.c.push_back(random_field(g, rng, 0.05, 1.0));
        st.c.push_back(random_field(g, rng, 0.05, 1.0));
        const double background = -mean(st.c[0] - st.c[1]);
        sc.fixed_charge = [g, background](double) { return CellField<double>::constant(g, background); };
        for (const auto& sp : sc.species)
          apply_dev = std::max(apply_dev, oracle::transport_apply_deviation(st.psi, sp, sc));
        step_dev = std::max(step_dev, oracle::step_deviation(step<double>(st, sc), oracle::dense_step(st, sc)));
      }
      const auto tag = fmt::format("{}d_{}", dim, to_string(kind));
      checks.push_back({"apply_vs_dense_" + tag, apply_dev <= 1e-13,
                        fmt::format("max relative deviation {:.3e} (limit 1e-13)", apply_dev)});
      checks.push_back(
          {"step_vs_dense_" + tag, step_dev <= 1e-10, fmt::format("max deviation {:.3e} (limit 1e-10)", step_dev)});
    }
    double poisson_dev = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto rhs = random_smooth_field(g, rng, 1.0, n / 2);
      PoissonOptions<double> po;
      po.tol = 1e-13;
      const auto iterative = solve_poisson(PoissonProblem<double>{0.7, rhs}, po).psi;
      const auto dense = oracle::dense_poisson_solve(rhs, 0.7);
      poisson_dev = std::max(poisson_dev, (iterative.values() - dense.values()).cwiseAbs().maxCoeff());
    }
    checks.push_back({fmt::format("poisson_vs_dense_{}d", dim), poisson_dev <= 1e-10,
                      fmt::format("max deviation {:.3e} (limit 1e-10)", poisson_dev)});
  }
  print_checks(checks, log);
  return all_pass(checks) ? kExitOk : kExitProperty;
}

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    switch (cfg.mode) {
      case RunMode::Simulate: return run_simulate(cfg, log);
      case RunMode::Mms: return run_mms(cfg, log);
      case RunMode::Properties: return run_properties(cfg, log);
      case RunMode::Verify: return run_verify(cfg, log);
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonConvergence& e) {
    log << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const PropertyViolation& e) {
    log << "error: " << e.what() << "\n";
    return kExitProperty;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace pnp
