#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pnp/config.hpp"
#include "pnp/transport.hpp"

namespace pnp {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitProperty = 4,
};

/// Grid, scheme and initial state described by a RunConfig.
struct Problem {
  GridSpec<double> grid;
  SchemeConfig<double> scheme;
  State<double> initial;
  double dt = 0;
  int steps = 0;
};

/// Fixed charge of four Gaussian point-charge surrogates at (1/4|3/4, 1/4|3/4)
/// with signs -, +, +, - (scaled to the configured domain).
CellField<double> gaussian_quadrupole(const GridSpec<double>& g, double amplitude, double width);

Problem build_problem(const RunConfig& cfg);

/// Column names of the simulate CSV for the given species.
std::vector<std::string> simulate_columns(const std::vector<SpeciesConfig>& species);

/// Column names of the convergence table CSV.
std::vector<std::string> mms_columns();

/// Resolves `out` against the PNP_OUTPUT_DIR override when it is relative.
std::string resolve_output_path(const std::string& out);

int run_simulate(const RunConfig& cfg, std::ostream& log);
int run_mms(const RunConfig& cfg, std::ostream& log);
int run_properties(const RunConfig& cfg, std::ostream& log);
int run_verify(const RunConfig& cfg, std::ostream& log);

/// Dispatches on cfg.mode and maps library exceptions to exit codes.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace pnp
