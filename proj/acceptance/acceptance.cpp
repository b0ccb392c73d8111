// Acceptance run: one PASS/FAIL line per criterion, details indented below.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kerrparamp/analysis.hpp"
#include "kerrparamp/circuit.hpp"
#include "kerrparamp/config.hpp"
#include "kerrparamp/errors.hpp"
#include "kerrparamp/kerr_solver.hpp"
#include "kerrparamp/linear_solver.hpp"
#include "kerrparamp/log.hpp"
#include "kerrparamp/units.hpp"
#include "oracles.hpp"

using namespace kerrparamp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mhz(double v) { return units::mhz_to_angular(v); }

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

struct Report {
  bool pass = true;
  std::vector<std::string> lines;

  static std::string format(const char* fmt, auto... args) {
    if constexpr (sizeof...(args) == 0) {
      return fmt;
    } else {
      char buf[512];
      std::snprintf(buf, sizeof buf, fmt, args...);
      return buf;
    }
  }
  void note(const char* fmt, auto... args) { lines.push_back(format(fmt, args...)); }
  void require(bool ok, const char* fmt, auto... args) {
    if (!ok) pass = false;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + format(fmt, args...));
  }
};

const std::string config_path = std::string(KERRPARAMP_SOURCE_DIR) + "/configs/paper_device.json";

int worker_count() { return static_cast<int>(std::max(2u, std::thread::hardware_concurrency())); }

// --- 1 ---------------------------------------------------------------------

CircuitSpec random_spec(std::mt19937& rng) {
  std::uniform_real_distribution<double> ic(0.5e-6, 5e-6), L(0.2e-9, 3e-9), C(0.1e-12, 2e-12),
      flux(-1.9, 1.9), kap(5.0, 100.0);
  CircuitSpec s;
  s.E_J = units::phi0 * ic(rng);
  s.L_a = L(rng);
  s.L_b = L(rng);
  s.L_c = L(rng);
  s.C_a = C(rng);
  s.C_b = C(rng);
  s.C_c = C(rng);
  double f = flux(rng);
  // stay clear of the flux points where g or L_J degenerate
  while (std::abs(std::cos(units::bias_phase(units::flux_from_quanta(f)))) < 0.05 ||
         std::abs(std::sin(units::bias_phase(units::flux_from_quanta(f)))) < 0.05)
    f = flux(rng);
  s.flux = units::flux_from_quanta(f);
  s.kappa_a = units::mhz_to_angular(kap(rng));
  s.kappa_b = units::mhz_to_angular(kap(rng));
  return s;
}

Report expansion_oracle_check() {
  Report r;
  std::mt19937 rng(1);
  const auto t0 = Clock::now();
  int done = 0;
  double worst = 0.0;
  while (done < 20) {
    const CircuitSpec s = random_spec(rng);
    ModeParams m;
    try {
      m = derive_mode_params(s);
    } catch (const NonPhysical&) {
      continue;
    }
    const OracleCoefficients o3 = expansion_oracle(s, 3);
    const OracleCoefficients o4 = expansion_oracle(s, 4);
    const double e = std::max({rel(o3.g, m.g), rel(o4.K.aa, m.K.aa), rel(o4.K.bb, m.K.bb),
                               rel(o4.K.cc, m.K.cc), rel(o4.K.ab, m.K.ab), rel(o4.K.ac, m.K.ac),
                               rel(o4.K.bc, m.K.bc)});
    worst = std::max(worst, e);
    ++done;
  }
  const double t = seconds_since(t0);
  r.require(worst < 1e-4, "worst relative deviation over g and K on 20 circuits: %.3e", worst);
  r.require(t < 10.0, "runtime %.2f s", t);
  return r;
}

// --- 2 ---------------------------------------------------------------------

Report closed_form_gain(const ModeParams& p) {
  Report r;
  double worst = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double ratio = 0.1 * k;
    const double n_p = ratio * p.kappa_a * p.kappa_b / (4 * p.g * p.g);
    const double g = reflection_gain_3(0.0, 0.0, {0.0, n_p}, p);
    worst = std::max(worst, rel(g, std::pow((1 + ratio) / (1 - ratio), 2)));
  }
  r.require(worst < 1e-10, "worst relative deviation for r = 0.1..0.9: %.3e", worst);
  const double n_p = 9.0 / 11.0 * p.kappa_a * p.kappa_b / (4 * p.g * p.g);
  const double g = reflection_gain_3(0.0, 0.0, {0.0, n_p}, p);
  r.require(rel(g, 100.0) < 1e-10, "G(r = 9/11) = %.15g", g);
  return r;
}

// --- 3 ---------------------------------------------------------------------

Report linear_limit(const ModeParams& device) {
  Report r;
  const ModeParams p = with_kerr_scale(device, 0.0);
  const double k = p.kappa_mean();
  const int n = 50;
  std::vector<double> eps, det;
  for (int i = 0; i < n; ++i) {
    eps.push_back(mhz(-10.0 + 20.0 * i / (n - 1)));
    det.push_back(-2.0 * k + 4.0 * k * i / (n - 1));
  }
  double n_crit = INFINITY;
  for (double e : eps) n_crit = std::min(n_crit, critical_pump_photons(e, p));
  std::vector<double> n_a;
  for (double dbm = -150.0; dbm <= -90.0 + 1e-9; dbm += 10.0)
    n_a.push_back(units::signal_strength_from_dbm(dbm, p.omega_a, p.kappa_a));

  double worst = 0.0;
  long count = 0, failures = 0;
  for (double frac : {0.3, 0.6, 0.9}) {
    const double n_p = frac * n_crit;
    for (double e : eps)
      for (double d : det) {
        const double ref = reflection_gain_3(d, e, {e, n_p}, p);
        for (double s : n_a) {
          try {
            const double g = solve_kerr_response(d, e, {e, n_p}, s, p).gain();
            worst = std::max(worst, rel(g, ref));
          } catch (const Error&) {
            ++failures;
          }
          ++count;
        }
      }
  }
  r.note("%ld solves, n_a over %.0f decades, n_p = 0.3/0.6/0.9 x %.4f", count,
         std::log10(n_a.back() / n_a.front()), n_crit);
  r.require(failures == 0, "solver failures: %ld", failures);
  r.require(worst < 1e-8, "worst relative deviation from the third-order gain: %.3e", worst);
  return r;
}

// --- 4 ---------------------------------------------------------------------

Report residuals(const ModeParams& p) {
  Report r;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> eps(-10.0, 10.0), dbm(-140.0, -90.0), det(-1.0, 1.0);
  const double k = p.kappa_mean();
  const double n_ref = units::signal_strength_from_dbm(-140.0, p.omega_a, p.kappa_a);
  int converged = 0, attempts = 0;
  double worst_lib = 0.0, worst_direct = 0.0;
  while (converged < 1000 && attempts < 5000) {
    ++attempts;
    const BiasPoint b = find_bias_for_gain(mhz(eps(rng)), 100.0, n_ref, p);
    for (int j = 0; j < 10 && converged < 1000; ++j) {
      const double d = b.delta_maxg + det(rng) * k;
      const double n = units::signal_strength_from_dbm(dbm(rng), p.omega_a, p.kappa_a);
      const PumpBias bias{b.epsilon, b.n_p};
      DriveResponse s;
      try {
        s = solve_kerr_response(d, b.epsilon, bias, n, p);
      } catch (const Error&) {
        continue;
      }
      if (!s.converged()) continue;
      ++converged;
      worst_lib = std::max(worst_lib, langevin4_residual(d, b.epsilon, bias, n, p, {s.alpha, s.beta}));
      const ShiftPair f = oracle::residual_direct(d, b.epsilon, bias, n, p, {s.delta_a, s.delta_b});
      worst_direct = std::max(worst_direct, std::hypot(f.a, f.b) / k);
    }
  }
  r.require(converged == 1000, "converged responses: %d", converged);
  r.require(worst_lib < 1e-10, "worst Langevin back-substitution residual: %.3e", worst_lib);
  r.require(worst_direct < 1e-10, "worst shift residual against the dense solve (/kappa): %.3e",
            worst_direct);
  return r;
}

// --- 5, 6 ------------------------------------------------------------------

const SaturationCurve* curve_at(const BiasStudy& s, double eps_mhz) {
  for (const auto& c : s.curves)
    if (std::abs(units::angular_to_mhz(c.bias.epsilon) - eps_mhz) < 1e-9) return &c;
  return nullptr;
}

Report fig3(const BiasStudy& study, double runtime) {
  Report r;
  const SaturationCurve* up = curve_at(study, -2.0);
  const SaturationCurve* dn = curve_at(study, 2.0);
  if (!up || !dn) {
    r.require(false, "no curves at +-2 MHz");
    return r;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < dn->points.size(); ++i)
    monotone = monotone && dn->points[i].gain_db <= dn->points[i - 1].gain_db + 1e-9;
  r.require(monotone && dn->p_minus_1db, "+2 MHz: gain falls monotonically, P-1dB %.2f dBm",
            dn->p_minus_1db.value_or(NAN));
  const double rise = peak_rise_db(*up);
  r.require(rise > 1e-3 && up->p_minus_1db,
            "-2 MHz: gain rises by %.4f dB, then falls through P-1dB %.2f dBm", rise,
            up->p_minus_1db.value_or(NAN));

  r.require(dn->limiting_side == LimitingSide::minus, "+2 MHz limiting side: %s",
            to_string(dn->limiting_side));
  // the side follows the rise: minus while it stays under 1 dB, plus beyond
  double flip = NAN;
  bool ordered = true;
  for (const auto& c : study.curves) {
    const bool plus = c.limiting_side == LimitingSide::plus;
    if (plus && c.bias.epsilon > 0.0) ordered = false;
    if (plus) flip = units::angular_to_mhz(c.bias.epsilon);
  }
  r.require(std::isfinite(flip) && ordered,
            "limiting side is plus only at negative detuning, up to eps = %.2f MHz", flip);
  r.note("-2 MHz limiting side: %s (rise stays below 1 dB)", to_string(up->limiting_side));
  const SaturationCurve* lo = curve_at(study, -10.0);
  const SaturationCurve* hi = curve_at(study, 10.0);
  if (lo && hi)
    r.require(lo->p_plus_1db && hi->p_minus_1db && *lo->p_plus_1db < *hi->p_minus_1db,
              "P+1dB at -10 MHz (%.2f dBm) below the P-1dB plateau at +10 MHz (%.2f dBm)",
              lo->p_plus_1db.value_or(NAN), hi->p_minus_1db.value_or(NAN));
  r.require(runtime < 60.0, "full map: %zu curves x %zu powers in %.2f s",
            study.curves.size(), study.curves.empty() ? 0 : study.curves[0].points.size(),
            runtime);
  return r;
}

Report fig4(const BiasStudy& study) {
  Report r;
  OptimalBiases o;
  try {
    o = find_optimal_biases(study);
  } catch (const EmptyCandidateSet& e) {
    r.require(false, "no optimum candidates: %s", e.what());
    return r;
  }
  std::vector<double> n_p;
  for (const auto& c : study.curves) n_p.push_back(c.bias.n_p);
  std::sort(n_p.begin(), n_p.end());
  const double lo = n_p.front(), hi = n_p.back();
  auto check = [&](const char* name, const std::optional<Optimum>& opt) {
    if (!opt) {
      r.require(false, "%s optimum missing", name);
      return;
    }
    const double frac = (opt->n_p - lo) / (hi - lo);
    const double rank =
        static_cast<double>(std::upper_bound(n_p.begin(), n_p.end(), opt->n_p) - n_p.begin()) /
        static_cast<double>(n_p.size());
    r.require(frac <= 0.25,
              "%s optimum eps %.2f MHz, n_p %.4f at %.1f%% of the n_p range (rank %.1f%%)", name,
              units::angular_to_mhz(opt->epsilon), opt->n_p, 100 * frac, 100 * rank);
  };
  check("monotone", o.monotone);
  check("gain-rise", o.gain_rise);
  r.note("n_p range over the grid: %.4f .. %.4f", lo, hi);

  // plateau: the last few large positive detunings
  double sum = 0.0;
  int count = 0;
  for (const auto& c : study.curves)
    if (units::angular_to_mhz(c.bias.epsilon) >= 8.0 - 1e-9 && c.p_minus_1db) {
      sum += *c.p_minus_1db;
      ++count;
    }
  if (!o.monotone || !count) {
    r.require(false, "plateau undefined");
    return r;
  }
  const double drop = *o.monotone->p_minus_1db - sum / count;
  r.require(drop >= 3.0 && drop <= 12.0,
            "P-1dB plateau at eps >= 8 MHz lies %.2f dB below the monotone optimum (band 3..12)",
            drop);
  return r;
}

// --- 7 ---------------------------------------------------------------------

Report kerr_scaling(const RunConfig& cfg, const ModeParams& p) {
  Report r;
  const auto rows = kerr_scaling_study({1.0, 0.1}, cfg.epsilons, cfg.gain_target(),
                                       cfg.signal_dbm, p, cfg.optima, cfg.policy, worker_count());
  auto compare = [&](const char* name, const std::optional<Optimum>& a,
                     const std::optional<Optimum>& b) {
    if (!a || !b) {
      r.require(false, "%s optimum missing", name);
      return;
    }
    const double gain = b->saturation_dbm - a->saturation_dbm;
    r.require(std::abs(gain - 10.0) <= 1.0, "%s: %.2f -> %.2f dBm, +%.3f dB", name,
              a->saturation_dbm, b->saturation_dbm, gain);
  };
  compare("monotone", rows[0].monotone, rows[1].monotone);
  compare("gain-rise", rows[0].gain_rise, rows[1].gain_rise);
  return r;
}

// --- 8 ---------------------------------------------------------------------

Report peak_detuning(const ModeParams& device) {
  Report r;
  const ModeParams& p = device;
  const double n_p = 0.8 * critical_pump_photons(0.0, p);

  std::vector<double> res3;
  for (double e : {4.0, 2.0, 1.0, 0.5}) {
    const PeakDetuning pk = peak_gain_detuning_3(mhz(e), {mhz(e), n_p}, p);
    res3.push_back(std::abs(pk.numeric - pk.analytic));
  }
  double order3 = INFINITY;
  for (std::size_t i = 1; i < res3.size(); ++i)
    order3 = std::min(order3, std::log2(res3[i - 1] / res3[i]));
  r.require(order3 >= 1.9, "third order, eps halving 4..0.5 MHz: observed order %.3f", order3);

  // fourth order: eps and the linewidth difference shrink together
  std::vector<double> res4;
  const double k_mean = 0.5 * (p.kappa_a + p.kappa_b);
  const double dk = p.kappa_b - p.kappa_a;
  for (double t : {1.0, 0.5, 0.25, 0.125}) {
    ModeParams q = p;
    q.kappa_a = k_mean - 0.5 * dk * t;
    q.kappa_b = k_mean + 0.5 * dk * t;
    const double e = mhz(4.0) * t;
    const PumpBias b{e, 0.8 * critical_pump_photons(e, q, 8 * q.K.ac * 9.0, 8 * q.K.bc * 9.0)};
    const PeakDetuning pk = peak_gain_detuning_4(e, b, q);
    res4.push_back(std::abs(pk.numeric - pk.analytic));
  }
  double order4 = INFINITY;
  for (std::size_t i = 1; i < res4.size(); ++i)
    order4 = std::min(order4, std::log2(res4[i - 1] / res4[i]));
  r.require(order4 >= 1.9, "fourth order, joint eps and kappa_b - kappa_a halving: order %.3f",
            order4);

  ModeParams q = p;
  q.kappa_b = q.kappa_a;
  q.K.bc = q.K.ac;
  const double e = mhz(1.7);
  double worst = 0.0, lo = INFINITY, hi = -INFINITY;
  for (double frac : {0.2, 0.5, 0.8, 0.95}) {
    const double n = frac * critical_pump_photons(e, q, 8 * q.K.ac, 8 * q.K.bc);
    const PeakDetuning pk = peak_gain_detuning_4(e, {e, n}, q);
    worst = std::max(worst, rel(pk.numeric, e / 2));
    lo = std::min(lo, pk.numeric);
    hi = std::max(hi, pk.numeric);
  }
  r.require(worst < 1e-9, "equal linewidths and cross-Kerr: peak at eps/2 within %.2e", worst);
  r.require((hi - lo) / (e / 2) < 1e-9, "spread over n_p: %.2e relative", (hi - lo) / (e / 2));
  return r;
}

// --- 9 ---------------------------------------------------------------------

Report hysteresis(const RunConfig& cfg, const ModeParams& p) {
  Report r;
  const double eps = mhz(-60.0);
  const auto grid = signal_grid_dbm(-140.0, -70.0, 61);
  const double n_ref = units::signal_strength_from_dbm(grid.front(), p.omega_a, p.kappa_a);
  const BiasPoint b = find_bias_for_gain(eps, cfg.gain_target(), n_ref, p, cfg.policy);
  const SaturationCurve c = saturation_curve(b, grid, SweepDirection::both, p, cfg.policy);
  r.note("eps -60 MHz, n_p %.4f, %zu powers from -140 to -70 dBm", b.n_p, grid.size());
  r.require(c.failures == 0, "non-converged points: %d", c.failures);

  std::vector<std::size_t> differ;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(c.points[i].gain_db - c.down[i].gain_db) > 1e-6) differ.push_back(i);
  r.require(!differ.empty() && c.hysteresis_dbm.has_value(),
            "up and down sweeps differ at %zu powers, window %.2f .. %.2f dBm", differ.size(),
            c.hysteresis_dbm ? c.hysteresis_dbm->first : NAN,
            c.hysteresis_dbm ? c.hysteresis_dbm->second : NAN);
  std::string folds;
  for (double f : c.folds_dbm) folds += " " + std::to_string(f);
  r.require(!c.folds_dbm.empty(), "folds reported at (dBm):%s", folds.c_str());
  if (differ.empty()) return r;

  const double k = p.kappa_mean();
  int multi = 0, sampled = 0;
  const std::size_t m = differ.size();
  for (int s = 0; s < 5; ++s) {
    const std::size_t i = differ[(m - 1) * s / 4];
    const oracle::RootScan scan = oracle::enumerate_fixed_points(
        b.delta_maxg, eps, {eps, b.n_p}, c.points[i].n_a, p, {-10 * k, 10 * k, -10 * k, 10 * k},
        1e-3 * k);
    ++sampled;
    if (scan.roots.size() >= 2) ++multi;
    r.note("%.2f dBm: %zu fixed points", grid[i], scan.roots.size());
  }
  r.require(multi >= 3, "grid oracle finds coexisting roots at %d of %d sampled powers", multi,
            sampled);
  return r;
}

// --- 10 --------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Report determinism() {
  Report r;
  const fs::path base = fs::temp_directory_path() / ("kerrparamp_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  const char* commands[] = {"derive-params", "gain-map", "bias-contour", "saturate",
                            "optimize",      "kerr-scaling", "phase-map"};
  bool ran = true;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = base / std::to_string(run);
    for (const char* cmd : commands) {
      std::string line = std::string("\"") + KERRPARAMP_CLI_PATH + "\" " + cmd + " --config \"" +
                         config_path + "\" --out \"" + dir.string() + "\" --threads 4";
      if (std::string(cmd) == "saturate") line += " --sweep-direction both";
      line += " > /dev/null";
      const int rc = std::system(line.c_str());
      if (rc != 0) {
        ran = false;
        r.require(false, "%s exited with status %d", cmd, rc);
      }
    }
  }
  if (!ran) return r;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(base / "0")) names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());
  int same = 0;
  for (const auto& n : names) {
    const bool eq = fs::exists(base / "1" / n) && slurp(base / "0" / n) == slurp(base / "1" / n);
    if (eq) ++same;
    else r.require(false, "%s differs between runs", n.c_str());
  }
  r.require(same == static_cast<int>(names.size()) && names.size() == 8,
            "%d of %zu CSV files byte-identical across two runs", same, names.size());
  fs::remove_all(base);
  return r;
}

}  // namespace

int main() {
  log::init_from_env();
  const RunConfig cfg = parse_config(config_path);
  const ModeParams p = config_params(cfg);

  const auto t0 = Clock::now();
  const BiasStudy study = study_biases(cfg.epsilons, cfg.gain_target(), cfg.signal_dbm, p,
                                       SweepDirection::up, cfg.policy, worker_count());
  const double map_time = seconds_since(t0);

  struct Item {
    const char* title;
    std::function<Report()> run;
  };
  const std::vector<Item> items = {
      {"expansion oracle matches g and K", [] { return expansion_oracle_check(); }},
      {"closed-form resonant gain", [&] { return closed_form_gain(p); }},
      {"zero-Kerr limit equals the linear gain", [&] { return linear_limit(p); }},
      {"converged responses satisfy the Langevin pair", [&] { return residuals(p); }},
      {"saturation shape at +-2 MHz", [&] { return fig3(study, map_time); }},
      {"optimal biases near the lowest pump, plateau offset", [&] { return fig4(study); }},
      {"Kerr x 0.1 raises saturation power by 10 dB", [&] { return kerr_scaling(cfg, p); }},
      {"peak-detuning formulas are first-order accurate", [&] { return peak_detuning(p); }},
      {"hysteresis window confirmed by the root oracle", [&] { return hysteresis(cfg, p); }},
      {"CLI output is deterministic", [] { return determinism(); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto t = Clock::now();
    Report rep;
    try {
      rep = items[i].run();
    } catch (const std::exception& e) {
      rep.require(false, "exception: %s", e.what());
    }
    if (!rep.pass) ++failed;
    std::printf("%s %zu %s (%.2f s)\n", rep.pass ? "PASS" : "FAIL", i + 1, items[i].title,
                seconds_since(t));
    for (const auto& l : rep.lines) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(items.size()) - failed, items.size());
  return failed ? 1 : 0;
}
