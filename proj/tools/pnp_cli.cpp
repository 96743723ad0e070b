#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pnp/config.hpp"
#include "pnp/runners.hpp"

namespace {

constexpr const char* kFooter = R"(Modes:
  simulate    advance the configured problem, one CSV row per report tick
  mms         manufactured-solution convergence tables, one CSV per mean
  properties  mass / positivity / energy checks plus randomized positivity trials
  verify      matrix-free operators and solves against dense oracles

CSV columns:
  simulate  step,t,energy,dissipation,tau_star,poisson_residual,linear_iterations,
            mass_<species>...,min_c_<species>...
  mms       mean,h,dt,err_c1,ord_c1,err_c2,ord_c2,err_psi,ord_psi

Exit codes: 0 success, 2 config error, 3 solver non-convergence, 4 property violation.
Environment: PNP_OUTPUT_DIR prefixes relative output paths.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slotboom finite-difference solver for the Poisson-Nernst-Planck equations"};
  app.footer(kFooter);
  std::string config_path, mode, mean, dt, out;
  int n = 0, verify_size = 0;
  long long seed = -1;
  app.add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "simulate | mms | properties | verify");
  app.add_option("--mean", mean, "harmonic | geometric | arithmetic | entropic");
  app.add_option("--n", n, "Cells per axis");
  app.add_option("--dt", dt, "Time step: number or rule such as h/10, h^2");
  app.add_option("--out", out, "Output CSV path");
  app.add_option("--seed", seed, "Seed for randomized initial data and trials");
  app.add_option("--verify-size", verify_size, "Grid size for oracle checks (verify mode)");
  CLI11_PARSE(app, argc, argv);

  pnp::RunConfig cfg;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      std::stringstream ss;
      ss << f.rdbuf();
      text = ss.str();
    }
    cfg = pnp::parse_config(text);
    if (!mode.empty()) cfg.mode = pnp::parse_run_mode(mode);
    if (!mean.empty()) {
      cfg.mean_kind = pnp::parse_mean_kind(mean);
      cfg.mms_means = {cfg.mean_kind};
      cfg.mean_given = true;
      std::erase_if(cfg.notices, [](const std::string& s) { return s.find("scheme.mean") != std::string::npos; });
    }
    if (n > 0) cfg.n = n;
    if (!dt.empty()) cfg.dt = pnp::StepRule::parse(dt);
    if (!out.empty()) cfg.out = out;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (verify_size > 0) cfg.verify_size = verify_size;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pnp::kExitConfig;
  }
  for (const auto& notice : cfg.notices) std::cerr << "notice: " << notice << "\n";
  return pnp::run(cfg, std::cout);
}
