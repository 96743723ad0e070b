#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnp/diagnostics.hpp"
#include "pnp/error.hpp"
#include "pnp/mobility.hpp"

namespace pnp {

/// Invalid configuration text; carries the offending key and line (0 when
/// the problem is not tied to a line).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, int line, const std::string& message)
      : Error(format(key, line, message)), key_(key), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string s = "config";
    if (line > 0) s += " line " + std::to_string(line);
    if (!key.empty()) s += " key '" + key + "'";
    return s + ": " + message;
  }
  std::string key_;
  int line_;
};

enum class RunMode { Simulate, Mms, Properties, Verify };

std::string to_string(RunMode m);
RunMode parse_run_mode(std::string_view text);

/// Time step either absolute or tied to the grid spacing: dt = factor * h^power.
struct StepRule {
  double factor = 0.1;
  int power = 1;
  std::string text = "h/10";

  double resolve(double h) const;
  static StepRule parse(std::string_view text);
};

struct SpeciesConfig {
  std::string name;
  double q = 0;
  /// Uniform initial concentration, or uniform random in [lo, hi] when
  /// random_init is set.
  double init = 0.1;
  bool random_init = false;
  double random_lo = 0;
  double random_hi = 0;
};

enum class FixedChargeKind { None, GaussianQuadrupole };

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  std::string out = "pnp_output.csv";
  std::uint64_t seed = 1;
  int report_every = 1;
  double t_end = 5.0;
  bool early_stop = true;
  int verify_size = 8;
  int trials = 1000;
  /// Properties mode: negate concentration of species 0 at this cell after
  /// the first step (test hook).
  std::optional<long> inject_fault_cell;

  int dim = 2;
  int n = 80;
  double lower = 0;
  double upper = 1;

  MeanKind mean_kind = MeanKind::Harmonic;
  bool mean_given = false;
  double kappa = 1e-3;
  StepRule dt;
  double poisson_tol = 1e-10;
  double transport_tol = 1e-11;
  int poisson_max_iter = 0;
  int transport_max_iter = 0;
  EnergyForm energy_form = EnergyForm::PerSpecies;

  FixedChargeKind fixed_charge = FixedChargeKind::GaussianQuadrupole;
  double charge_amplitude = 1;
  double charge_width = 100;

  std::vector<SpeciesConfig> species;

  std::vector<int> mms_n = {50, 60, 70, 80, 90};
  std::vector<MeanKind> mms_means = {MeanKind::Harmonic, MeanKind::Geometric, MeanKind::Arithmetic,
                                     MeanKind::Entropic};
  double mms_t_end = 0.1;
  double mms_dt_ratio = 1;

  /// Notices produced while parsing (e.g. defaults taken).
  std::vector<std::string> notices;

  /// Throws ConfigError on any constraint violation.
  void validate() const;
};

/// Defaults: two monovalent species at 0.1 around a Gaussian quadrupole of
/// fixed charge, kappa = 1e-3, dt = h/10.
RunConfig default_config();

/// Parses sectioned key = value text on top of default_config(). Unknown
/// sections or keys are rejected.
RunConfig parse_config(std::string_view text);

}  // namespace pnp
