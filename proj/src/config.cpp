#include "kerrparamp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "kerrparamp/errors.hpp"
#include "kerrparamp/units.hpp"

namespace kerrparamp {

using nlohmann::json;

namespace {

const std::vector<std::string> kUnitSuffixes = {"_mhz", "_ghz", "_ua", "_j",   "_ohm",
                                                "_nh",  "_pf",  "_db", "_dbm", "_phi0"};

std::string strip_suffix(const std::string& key) {
  for (const auto& s : kUnitSuffixes)
    if (key.size() > s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0)
      return key.substr(0, key.size() - s.size());
  return key;
}

bool has_suffix(const std::string& key) { return strip_suffix(key) != key; }

/// Object view that tracks the key path and rejects unknown keys.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_, "expected an object");
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void allow(std::initializer_list<std::string> keys) const {
    std::set<std::string> known(keys);
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      const std::string& k = it.key();
      if (known.count(k)) continue;
      const std::string stem = strip_suffix(k);
      for (const auto& good : known)
        if (has_suffix(good) && strip_suffix(good) == stem)
          throw UnitError(at(k), "missing or wrong unit suffix (expected '" + good + "')");
      throw SchemaError(at(k), "unknown key");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const std::string& path() const { return path_; }

  double number(const std::string& key) const {
    if (!has(key)) throw SchemaError(at(key), "required key missing");
    const json& v = j_.at(key);
    if (!v.is_number()) throw SchemaError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(at(key), "must be finite");
    return d;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  double positive(const std::string& key) const {
    const double d = number(key);
    if (!(d > 0.0)) throw SchemaError(at(key), "must be positive");
    return d;
  }

  double positive(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }

  int integer(const std::string& key, int fallback, int minimum) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw SchemaError(at(key), "expected an integer");
    const long long n = v.get<long long>();
    if (n < minimum || n > 1000000000) throw SchemaError(at(key), "out of range");
    return static_cast<int>(n);
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw SchemaError(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw SchemaError(at(key), "expected a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
        throw SchemaError(at(key) + "[" + std::to_string(i) + "]", "expected a finite number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Section sub(const std::string& key) const { return Section(j_.at(key), at(key)); }
  const json& raw(const std::string& key) const { return j_.at(key); }

 private:
  const json& j_;
  std::string path_;
};

struct ModeLC {
  double L, C;
};

ModeLC parse_mode(const Section& s, double L_J) {
  s.allow({"freq_ghz", "impedance_ohm", "inductance_nh", "capacitance_pf"});
  const bool by_freq = s.has("freq_ghz") || s.has("impedance_ohm");
  const bool by_lc = s.has("inductance_nh") || s.has("capacitance_pf");
  if (by_freq == by_lc)
    throw SchemaError(s.path(), "give either freq_ghz + impedance_ohm or inductance_nh + capacitance_pf");
  if (by_lc) return {s.positive("inductance_nh") * 1e-9, s.positive("capacitance_pf") * 1e-12};

  // frequency and impedance of the full mode, ring inductance included
  const double omega = units::ghz_to_angular(s.positive("freq_ghz"));
  const double Z = s.positive("impedance_ohm");
  const double L_total = Z / omega;
  const double L = L_total - L_J;
  if (!(L > 0.0))
    throw SchemaError(s.at("freq_ghz"), "mode inductance would be below the junction inductance");
  return {L, 1.0 / (Z * omega)};
}

std::vector<double> parse_axis(const Section& parent, const std::string& key, bool points_per_decade) {
  const json& v = parent.raw(key);
  if (v.is_array()) {
    std::vector<double> out = parent.numbers(key);
    return out;
  }
  const Section s = parent.sub(key);
  if (points_per_decade) {
    s.allow({"start", "stop", "points_per_decade"});
    const double start = s.number("start");
    const double stop = s.number("stop");
    if (!(stop > start)) throw SchemaError(s.at("stop"), "must exceed start");
    return signal_grid_dbm(start, stop, s.integer("points_per_decade", 61, 2));
  }
  s.allow({"start", "stop", "step"});
  const double start = s.number("start");
  const double stop = s.number("stop");
  const double step = s.positive("step");
  if (!(stop >= start)) throw SchemaError(s.at("stop"), "must not be below start");
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  if (n > 100000) throw SchemaError(s.at("step"), "grid too large");
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) {
    // snap to the step lattice so printed values are clean
    const double x = start + static_cast<double>(i) * step;
    out.push_back(std::round(x / step * 1e6) / 1e6 * step);
  }
  return out;
}

void require_increasing(const std::vector<double>& v, const std::string& path) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw SchemaError(path, "values must be strictly increasing");
}

}  // namespace

double RunConfig::gain_target() const { return std::pow(10.0, gain_target_db / 10.0); }

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("$", "top level must be an object");

  RunConfig cfg;
  const Section top(root, "");
  top.allow({"notes", "device", "bias", "solver", "analysis", "output"});
  cfg.notes = top.string("notes", "");
  if (!top.has("device")) throw SchemaError("device", "required section missing");

  {
    const Section d = top.sub("device");
    d.allow({"josephson_energy_j", "critical_current_ua", "flux_phi0", "kappa_a_mhz",
             "kappa_b_mhz", "kerr_scale", "mode_a", "mode_b", "mode_c"});
    const bool has_ej = d.has("josephson_energy_j");
    const bool has_ic = d.has("critical_current_ua");
    if (has_ej == has_ic)
      throw SchemaError(d.at("critical_current_ua"),
                        "give exactly one of critical_current_ua or josephson_energy_j");
    CircuitSpec& c = cfg.circuit;
    c.E_J = has_ej ? d.positive("josephson_energy_j")
                   : units::phi0 * d.positive("critical_current_ua") * 1e-6;
    const double quanta = d.number("flux_phi0");
    c.flux = units::flux_from_quanta(quanta);
    c.kappa_a = units::mhz_to_angular(d.positive("kappa_a_mhz"));
    c.kappa_b = units::mhz_to_angular(d.positive("kappa_b_mhz"));
    cfg.kerr_scale = d.number("kerr_scale", 1.0);
    if (!(cfg.kerr_scale >= 0.0)) throw SchemaError(d.at("kerr_scale"), "must be non-negative");

    const double cosine = std::cos(units::bias_phase(c.flux));
    if (std::abs(cosine) < 1e-6)
      throw SchemaError(d.at("flux_phi0"), "flux sits at a Josephson-inductance singularity");
    const double L_J = units::phi0 * units::phi0 / (c.E_J * cosine);
    for (const char* m : {"mode_a", "mode_b", "mode_c"})
      if (!d.has(m)) throw SchemaError(d.at(m), "required key missing");
    const ModeLC a = parse_mode(d.sub("mode_a"), L_J);
    const ModeLC b = parse_mode(d.sub("mode_b"), L_J);
    const ModeLC cm = parse_mode(d.sub("mode_c"), L_J);
    c.L_a = a.L;
    c.C_a = a.C;
    c.L_b = b.L;
    c.C_b = b.C;
    c.L_c = cm.L;
    c.C_c = cm.C;
  }

  cfg.epsilons.clear();
  std::vector<double> eps_mhz;
  for (int i = -40; i <= 40; ++i) eps_mhz.push_back(0.25 * i);
  cfg.signal_dbm = signal_grid_dbm(-140.0, -90.0, 61);
  cfg.contour_signal_dbm = {-140.0, -120.0, -110.0, -100.0};
  for (int i = 0; i <= 56; ++i) cfg.np_fractions.push_back(0.5 + 0.0125 * i);

  if (top.has("bias")) {
    const Section b = top.sub("bias");
    b.allow({"gain_target_db", "epsilon_mhz", "signal_dbm", "contour_signal_dbm", "np_fraction_grid"});
    cfg.gain_target_db = b.positive("gain_target_db", 20.0);
    if (b.has("epsilon_mhz")) eps_mhz = parse_axis(b, "epsilon_mhz", false);
    if (b.has("signal_dbm")) {
      cfg.signal_dbm = parse_axis(b, "signal_dbm", true);
      require_increasing(cfg.signal_dbm, b.at("signal_dbm"));
      if (cfg.signal_dbm.size() < 2) throw SchemaError(b.at("signal_dbm"), "need at least two points");
    }
    if (b.has("contour_signal_dbm")) cfg.contour_signal_dbm = b.numbers("contour_signal_dbm");
    if (b.has("np_fraction_grid")) {
      const Section g = b.sub("np_fraction_grid");
      g.allow({"start", "stop", "count"});
      const double start = g.positive("start");
      const double stop = g.positive("stop");
      const int count = g.integer("count", 57, 2);
      if (!(stop > start)) throw SchemaError(g.at("stop"), "must exceed start");
      cfg.np_fractions.clear();
      for (int i = 0; i < count; ++i) cfg.np_fractions.push_back(start + (stop - start) * i / (count - 1));
    }
  }
  std::sort(eps_mhz.begin(), eps_mhz.end());
  eps_mhz.erase(std::unique(eps_mhz.begin(), eps_mhz.end()), eps_mhz.end());
  for (double e : eps_mhz) cfg.epsilons.push_back(units::mhz_to_angular(e));

  if (top.has("solver")) {
    const Section s = top.sub("solver");
    s.allow({"tolerance", "max_iterations", "damping_floor", "min_step_fraction", "step_growth",
             "growth_after", "max_shift_jump_kappa"});
    ContinuationPolicy& p = cfg.policy;
    p.tolerance = s.positive("tolerance", p.tolerance);
    p.max_iterations = s.integer("max_iterations", p.max_iterations, 1);
    p.damping_floor = s.positive("damping_floor", p.damping_floor);
    p.min_step_fraction = s.positive("min_step_fraction", p.min_step_fraction);
    p.step_growth = s.positive("step_growth", p.step_growth);
    p.growth_after = s.integer("growth_after", p.growth_after, 1);
    p.max_shift_jump = s.positive("max_shift_jump_kappa", p.max_shift_jump);
    if (p.damping_floor > 1.0) throw SchemaError(s.at("damping_floor"), "must not exceed 1");
    if (p.step_growth < 1.0) throw SchemaError(s.at("step_growth"), "must be at least 1");
  }

  if (top.has("analysis")) {
    const Section a = top.sub("analysis");
    a.allow({"monotone_tolerance_db", "kerr_scales"});
    cfg.optima.monotone_tolerance_db = a.positive("monotone_tolerance_db", cfg.optima.monotone_tolerance_db);
    if (a.has("kerr_scales")) {
      cfg.kerr_scales = a.numbers("kerr_scales");
      for (double v : cfg.kerr_scales)
        if (!(v >= 0.0)) throw SchemaError(a.at("kerr_scales"), "scales must be non-negative");
    }
  }

  if (top.has("output")) {
    const Section o = top.sub("output");
    o.allow({"directory", "precision"});
    cfg.output_dir = o.string("directory", cfg.output_dir);
    cfg.precision = o.integer("precision", cfg.precision, 1);
    if (cfg.precision > 17) throw SchemaError(o.at("precision"), "at most 17 digits");
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("$", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ModeParams config_params(const RunConfig& cfg) {
  const ModeParams p = derive_mode_params(cfg.circuit);
  return cfg.kerr_scale == 1.0 ? p : with_kerr_scale(p, cfg.kerr_scale);
}

}  // namespace kerrparamp
