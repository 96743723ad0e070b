#include "pnp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace pnp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_double(const std::string& key, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, line, "expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, int line, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key, line, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, int line, const std::string& v) {
  const auto s = lower(v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(key, line, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Mms: return "mms";
    case RunMode::Properties: return "properties";
    case RunMode::Verify: return "verify";
  }
  return "unknown";
}

RunMode parse_run_mode(std::string_view text) {
  const auto s = lower(std::string(text));
  if (s == "simulate") return RunMode::Simulate;
  if (s == "mms") return RunMode::Mms;
  if (s == "properties") return RunMode::Properties;
  if (s == "verify") return RunMode::Verify;
  throw InvalidArgument("unknown mode '" + std::string(text) + "'");
}

double StepRule::resolve(double h) const { return factor * std::pow(h, power); }

// Accepted forms: 0.001 | h | h^2 | h/10 | h^2/4 | 0.5*h | 2*h^2
StepRule StepRule::parse(std::string_view text) {
  StepRule r;
  r.text = trim(text);
  std::string s = lower(r.text);
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  const auto hpos = s.find('h');
  if (hpos == std::string::npos) {
    r.factor = std::stod(s);
    r.power = 0;
    return r;
  }
  double factor = 1;
  if (hpos > 0) {
    if (s[hpos - 1] != '*') throw InvalidArgument("bad step rule");
    factor = std::stod(s.substr(0, hpos - 1));
  }
  std::string rest = s.substr(hpos + 1);
  int power = 1;
  if (!rest.empty() && rest[0] == '^') {
    std::size_t used = 0;
    power = std::stoi(rest.substr(1), &used);
    rest = rest.substr(1 + used);
  }
  if (!rest.empty()) {
    if (rest[0] != '/') throw InvalidArgument("bad step rule");
    std::size_t used = 0;
    const double div = std::stod(rest.substr(1), &used);
    if (used + 1 != rest.size()) throw InvalidArgument("bad step rule");
    factor /= div;
  }
  r.factor = factor;
  r.power = power;
  return r;
}

RunConfig default_config() {
  RunConfig c;
  c.dt = StepRule::parse("h/10");
  c.species = {{"cation", 1.0, 0.1}, {"anion", -1.0, 0.1}};
  return c;
}

void RunConfig::validate() const {
  if (dim < 1 || dim > 3) throw ConfigError("dim", 0, "must be 1, 2 or 3");
  if (n < 2) throw ConfigError("n", 0, "must be at least 2");
  if (!(upper > lower)) throw ConfigError("upper", 0, "must exceed lower");
  if (!(kappa > 0)) throw ConfigError("kappa", 0, "must be positive");
  if (!(dt.factor > 0) || !std::isfinite(dt.factor)) throw ConfigError("dt", 0, "must be positive");
  if (!(t_end > 0)) throw ConfigError("t_end", 0, "must be positive");
  if (report_every < 1) throw ConfigError("report_every", 0, "must be at least 1");
  if (!(poisson_tol > 0 && poisson_tol < 1)) throw ConfigError("poisson_tol", 0, "must lie in (0, 1)");
  if (!(transport_tol > 0 && transport_tol < 1)) throw ConfigError("transport_tol", 0, "must lie in (0, 1)");
  if (poisson_max_iter < 0) throw ConfigError("poisson_max_iter", 0, "must be non-negative");
  if (transport_max_iter < 0) throw ConfigError("transport_max_iter", 0, "must be non-negative");
  if (verify_size < 2 || verify_size * verify_size > 4096) throw ConfigError("verify_size", 0, "must lie in [2, 64]");
  if (trials < 0) throw ConfigError("trials", 0, "must be non-negative");
  if (fixed_charge == FixedChargeKind::GaussianQuadrupole && dim != 2)
    throw ConfigError("kind", 0, "gaussian-quadrupole fixed charge needs dim = 2");
  if (species.empty()) throw ConfigError("species", 0, "at least one species is required");
  for (const auto& s : species) {
    if (!std::isfinite(s.q)) throw ConfigError("q", 0, "valence of '" + s.name + "' must be finite");
    if (s.random_init) {
      if (!(s.random_lo > 0 && s.random_hi > s.random_lo))
        throw ConfigError("init", 0, "random range of '" + s.name + "' must satisfy 0 < lo < hi");
    } else if (!(s.init > 0)) {
      throw ConfigError("init", 0, "initial concentration of '" + s.name + "' must be positive");
    }
  }
  if (mms_n.empty()) throw ConfigError("n_list", 0, "must not be empty");
  for (std::size_t i = 0; i < mms_n.size(); ++i) {
    if (mms_n[i] < 2) throw ConfigError("n_list", 0, "entries must be at least 2");
    if (i > 0 && mms_n[i] <= mms_n[i - 1]) throw ConfigError("n_list", 0, "must be strictly ascending");
  }
  if (mms_means.empty()) throw ConfigError("means", 0, "must not be empty");
  if (!(mms_t_end > 0)) throw ConfigError("t_end", 0, "mms t_end must be positive");
  if (!(mms_dt_ratio > 0)) throw ConfigError("dt_ratio", 0, "must be positive");
}

RunConfig parse_config(std::string_view text) {
  RunConfig c = default_config();
  std::map<std::string, int> key_lines;
  std::string section;
  SpeciesConfig* current_species = nullptr;
  bool species_seen = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find_first_of("#;");
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", line_no, "unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      current_species = nullptr;
      if (section.rfind("species.", 0) == 0) {
        const std::string name = section.substr(8);
        if (name.empty()) throw ConfigError("", line_no, "species section needs a name");
        if (!species_seen) c.species.clear();
        species_seen = true;
        for (const auto& s : c.species)
          if (s.name == name) throw ConfigError("", line_no, "duplicate species '" + name + "'");
        c.species.push_back({name, 0.0, 0.1});
        current_species = &c.species.back();
        key_lines["species." + name + ".q"] = -line_no;  // marks q as required
        section = "species";
      } else if (section != "run" && section != "grid" && section != "scheme" && section != "fixed_charge" &&
                 section != "mms") {
        throw ConfigError("", line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(key, line_no, "key outside of any section");
    if (value.empty()) throw ConfigError(key, line_no, "missing value");
    const std::string qualified = (current_species ? "species." + current_species->name : section) + "." + key;
    if (key_lines.count(qualified) && key_lines[qualified] > 0) throw ConfigError(key, line_no, "duplicate key");
    key_lines[qualified] = line_no;

    auto unknown = [&] { throw ConfigError(key, line_no, "unknown key in section [" + section + "]"); };
    auto positive_int = [&](long v) {
      if (v < 0 || v > 1'000'000'000L) throw ConfigError(key, line_no, "out of range");
      return static_cast<int>(v);
    };

    try {
      if (section == "run") {
        if (key == "mode") c.mode = parse_run_mode(value);
        else if (key == "out") c.out = value;
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(positive_int(to_long(key, line_no, value)));
        else if (key == "report_every") c.report_every = positive_int(to_long(key, line_no, value));
        else if (key == "t_end") c.t_end = to_double(key, line_no, value);
        else if (key == "early_stop") c.early_stop = to_bool(key, line_no, value);
        else if (key == "verify_size") c.verify_size = positive_int(to_long(key, line_no, value));
        else if (key == "trials") c.trials = positive_int(to_long(key, line_no, value));
        else if (key == "inject_fault_cell") c.inject_fault_cell = to_long(key, line_no, value);
        else unknown();
      } else if (section == "grid") {
        if (key == "dim") c.dim = positive_int(to_long(key, line_no, value));
        else if (key == "n") c.n = positive_int(to_long(key, line_no, value));
        else if (key == "lower") c.lower = to_double(key, line_no, value);
        else if (key == "upper") c.upper = to_double(key, line_no, value);
        else unknown();
      } else if (section == "scheme") {
        if (key == "mean") {
          c.mean_kind = parse_mean_kind(value);
          c.mean_given = true;
        } else if (key == "kappa") c.kappa = to_double(key, line_no, value);
        else if (key == "dt") c.dt = StepRule::parse(value);
        else if (key == "poisson_tol") c.poisson_tol = to_double(key, line_no, value);
        else if (key == "transport_tol") c.transport_tol = to_double(key, line_no, value);
        else if (key == "poisson_max_iter") c.poisson_max_iter = positive_int(to_long(key, line_no, value));
        else if (key == "transport_max_iter") c.transport_max_iter = positive_int(to_long(key, line_no, value));
        else if (key == "energy") {
          const auto v = lower(value);
          if (v == "per-species") c.energy_form = EnergyForm::PerSpecies;
          else if (v == "single") c.energy_form = EnergyForm::Single;
          else throw ConfigError(key, line_no, "expected per-species or single");
        } else unknown();
      } else if (section == "fixed_charge") {
        if (key == "kind") {
          const auto v = lower(value);
          if (v == "none") c.fixed_charge = FixedChargeKind::None;
          else if (v == "gaussian-quadrupole") c.fixed_charge = FixedChargeKind::GaussianQuadrupole;
          else throw ConfigError(key, line_no, "expected none or gaussian-quadrupole");
        } else if (key == "amplitude") c.charge_amplitude = to_double(key, line_no, value);
        else if (key == "width") c.charge_width = to_double(key, line_no, value);
        else unknown();
      } else if (section == "species") {
        if (key == "q") c.species.back().q = to_double(key, line_no, value);
        else if (key == "init") {
          auto& sp = c.species.back();
          const auto v = lower(value);
          if (v.rfind("random:", 0) == 0) {
            const auto parts = split(v.substr(7), ':');
            if (parts.size() != 2) throw ConfigError(key, line_no, "expected random:lo:hi");
            sp.random_init = true;
            sp.random_lo = to_double(key, line_no, parts[0]);
            sp.random_hi = to_double(key, line_no, parts[1]);
          } else {
            sp.random_init = false;
            sp.init = to_double(key, line_no, value);
          }
        } else unknown();
      } else if (section == "mms") {
        if (key == "n_list") {
          c.mms_n.clear();
          for (const auto& s : split(value, ',')) c.mms_n.push_back(positive_int(to_long(key, line_no, s)));
        } else if (key == "means") {
          c.mms_means.clear();
          for (const auto& s : split(value, ',')) c.mms_means.push_back(parse_mean_kind(s));
        } else if (key == "t_end") c.mms_t_end = to_double(key, line_no, value);
        else if (key == "dt_ratio") c.mms_dt_ratio = to_double(key, line_no, value);
        else unknown();
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, line_no, std::string("invalid value '") + value + "': " + e.what());
    }
  }

  for (const auto& [k, l] : key_lines)
    if (l < 0) throw ConfigError("q", -l, "species section requires a valence 'q'");

  if (!c.mean_given) c.notices.push_back("scheme.mean not set; using harmonic");

  try {
    c.validate();
  } catch (const ConfigError& e) {
    int line = 0;
    for (const auto& [k, l] : key_lines) {
      const auto dot = k.rfind('.');
      if (k.substr(dot + 1) == e.key()) line = l;
    }
    throw ConfigError(e.key(), line, std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
  return c;
}

}  // namespace pnp
