#include "kerrparamp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <thread>

#include "kerrparamp/analysis.hpp"
#include "kerrparamp/config.hpp"
#include "kerrparamp/csv.hpp"
#include "kerrparamp/errors.hpp"
#include "kerrparamp/log.hpp"
#include "kerrparamp/units.hpp"

namespace kerrparamp {

namespace {

namespace fs = std::filesystem;
using units::angular_to_mhz;

struct Options {
  std::string config;
  std::string out_dir;
  std::vector<double> epsilon_mhz;
  std::vector<double> signal_dbm;
  std::string direction = "up";
  std::string frequency = "fixed";
  int threads = 1;
};

struct Context {
  RunConfig cfg;
  ModeParams params;
  fs::path dir;
  int threads = 1;
  SweepDirection direction = SweepDirection::up;
  SignalFrequency frequency = SignalFrequency::fixed;
  std::ostream& out;
  std::ostream& err;

  std::string num(double v) const { return format_number(v, cfg.precision); }
  std::string num(const std::optional<double>& v) const { return format_number(v, cfg.precision); }
  std::string path(const char* name) const { return (dir / name).string(); }
};

// solver failures over more than 10% of the grid
int verdict(const Context& c, std::size_t failures, std::size_t total, const char* what) {
  if (total > 0 && failures * 10 > total) {
    c.err << what << ": solver failed on " << failures << " of " << total << " grid points\n";
    return exit_solver;
  }
  if (failures) log::warn("{}: {} of {} grid points failed", what, failures, total);
  return exit_ok;
}

int cmd_derive_params(Context& c) {
  const ModeParams& p = c.params;
  auto ghz = [&](double w) { return c.num(units::angular_to_ghz(w)); };
  auto mhz = [&](double w) { return c.num(angular_to_mhz(w)); };
  auto khz = [&](double w) { return c.num(angular_to_mhz(w) * 1e3); };
  CsvWriter w(c.path("params.csv"),
              {"omega_a_ghz", "omega_b_ghz", "omega_c_ghz", "dressed_a_ghz", "dressed_b_ghz",
               "dressed_c_ghz", "kappa_a_mhz", "kappa_b_mhz", "g_mhz", "k_aa_khz", "k_bb_khz",
               "k_cc_khz", "k_ab_khz", "k_ac_khz", "k_bc_khz", "p_a_ratio", "p_b_ratio",
               "p_c_ratio", "l_j_nh", "z_a_ohm", "z_b_ohm", "z_c_ohm"});
  w.row({ghz(p.omega_a), ghz(p.omega_b), ghz(p.omega_c), ghz(p.dressed_a), ghz(p.dressed_b),
         ghz(p.dressed_c), mhz(p.kappa_a), mhz(p.kappa_b), mhz(p.g), khz(p.K.aa), khz(p.K.bb),
         khz(p.K.cc), khz(p.K.ab), khz(p.K.ac), khz(p.K.bc), c.num(p.p_a), c.num(p.p_b),
         c.num(p.p_c), c.num(p.L_J * 1e9), c.num(p.Z_a), c.num(p.Z_b), c.num(p.Z_c)});

  std::ostream& o = c.out;
  o << std::setprecision(6);
  o << "mode      f/GHz      f'/GHz     p          Z/ohm\n";
  const char* names[] = {"a", "b", "c"};
  const double f[] = {p.omega_a, p.omega_b, p.omega_c};
  const double fd[] = {p.dressed_a, p.dressed_b, p.dressed_c};
  const double pr[] = {p.p_a, p.p_b, p.p_c};
  const double z[] = {p.Z_a, p.Z_b, p.Z_c};
  for (int i = 0; i < 3; ++i)
    o << names[i] << "         " << std::setw(10) << units::angular_to_ghz(f[i]) << " "
      << std::setw(10) << units::angular_to_ghz(fd[i]) << " " << std::setw(10) << pr[i] << " "
      << std::setw(10) << z[i] << "\n";
  o << "g/2pi       = " << angular_to_mhz(p.g) << " MHz\n";
  o << "K/2pi (kHz)   aa " << angular_to_mhz(p.K.aa) * 1e3 << "  bb " << angular_to_mhz(p.K.bb) * 1e3
    << "  cc " << angular_to_mhz(p.K.cc) * 1e3 << "\n";
  o << "              ab " << angular_to_mhz(p.K.ab) * 1e3 << "  ac " << angular_to_mhz(p.K.ac) * 1e3
    << "  bc " << angular_to_mhz(p.K.bc) * 1e3 << "\n";
  o << "L_J         = " << p.L_J * 1e9 << " nH\n";
  return exit_ok;
}

int cmd_gain_map(Context& c) {
  const double n_ref = critical_pump_photons(0.0, c.params);
  std::vector<double> n_p;
  for (double f : c.cfg.np_fractions) n_p.push_back(f * n_ref);
  const auto cells = gain_map(c.cfg.epsilons, n_p, c.params, c.threads);
  CsvWriter w(c.path("gainmap.csv"), {"eps_mhz", "np", "gain_db", "delta_maxg_mhz"});
  for (const GainCell& cell : cells) {
    std::optional<double> d;
    if (cell.delta_maxg) d = angular_to_mhz(*cell.delta_maxg);
    w.row({c.num(angular_to_mhz(cell.epsilon)), c.num(cell.n_p), c.num(cell.gain_db), c.num(d)});
  }
  return exit_ok;
}

int cmd_bias_contour(Context& c, const std::vector<double>& signal) {
  const auto pts = bias_contour(c.cfg.epsilons, c.cfg.gain_target(), signal, c.params,
                                c.cfg.policy, c.threads);
  CsvWriter w(c.path("contour.csv"), {"psig_dbm", "eps_mhz", "np", "delta_maxg_mhz"});
  std::vector<const ContourPoint*> order;
  for (const auto& p : pts) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const ContourPoint* a, const ContourPoint* b) {
    return std::tie(a->psig_dbm, a->epsilon) < std::tie(b->psig_dbm, b->epsilon);
  });
  std::size_t gaps = 0;
  for (const ContourPoint* p : order) {
    std::optional<double> d;
    if (p->delta_maxg) d = angular_to_mhz(*p->delta_maxg);
    if (!p->n_p) ++gaps;
    w.row({c.num(p->psig_dbm), c.num(angular_to_mhz(p->epsilon)), c.num(p->n_p), c.num(d)});
  }
  if (gaps) log::info("bias contour: {} of {} points have no sub-critical solution", gaps, pts.size());
  return exit_ok;
}

void write_thresholds(const Context& c, const BiasStudy& study) {
  CsvWriter w(c.path("thresholds.csv"),
              {"eps_mhz", "np", "delta_maxg_mhz", "g_small_db", "p_minus_1db_dbm",
               "p_plus_1db_dbm", "limiting_side", "rise_db", "fold_count",
               "hysteresis_start_dbm", "hysteresis_stop_dbm"});
  for (const SaturationCurve& s : study.curves) {
    std::optional<double> h0, h1;
    if (s.hysteresis_dbm) {
      h0 = s.hysteresis_dbm->first;
      h1 = s.hysteresis_dbm->second;
    }
    const double rise = s.points.empty() ? std::nan("") : peak_rise_db(s);
    w.row({c.num(angular_to_mhz(s.bias.epsilon)), c.num(s.bias.n_p),
           c.num(angular_to_mhz(s.bias.delta_maxg)), c.num(units::power_to_db(s.bias.g_small)),
           c.num(s.p_minus_1db), c.num(s.p_plus_1db), to_string(s.limiting_side), c.num(rise),
           std::to_string(s.folds_dbm.size()), c.num(h0), c.num(h1)});
  }
}

std::size_t study_failures(const BiasStudy& study, std::size_t per_curve, std::size_t* total) {
  std::size_t failures = study.errors.size() * per_curve;
  for (const auto& s : study.curves) failures += static_cast<std::size_t>(s.failures);
  *total = (study.curves.size() + study.errors.size()) * per_curve;
  return failures;
}

int cmd_saturate(Context& c, const std::vector<double>& signal) {
  const BiasStudy study = study_biases(c.cfg.epsilons, c.cfg.gain_target(), signal, c.params,
                                       c.direction, c.cfg.policy, c.threads, c.frequency);
  for (const auto& e : study.errors) log::warn("saturate: {}", e);
  CsvWriter w(c.path("saturation.csv"),
              {"eps_mhz", "psig_dbm", "gain_db", "branch", "direction", "delta_mhz"});
  for (const SaturationCurve& s : study.curves) {
    const std::string eps = c.num(angular_to_mhz(s.bias.epsilon));
    for (const auto& p : s.points)
      w.row({eps, c.num(p.psig_dbm), c.num(p.gain_db), to_string(p.branch), "up",
             c.num(angular_to_mhz(p.delta))});
    for (auto it = s.down.rbegin(); it != s.down.rend(); ++it)
      w.row({eps, c.num(it->psig_dbm), c.num(it->gain_db), to_string(it->branch), "down",
             c.num(angular_to_mhz(it->delta))});
  }
  write_thresholds(c, study);
  std::size_t total = 0;
  const bool both = c.direction == SweepDirection::both && c.frequency == SignalFrequency::fixed;
  const std::size_t per_curve = signal.size() * (both ? 2 : 1);
  const std::size_t failures = study_failures(study, per_curve, &total);
  return verdict(c, failures, total, "saturate");
}

int cmd_optimize(Context& c, const std::vector<double>& signal) {
  const BiasStudy study = study_biases(c.cfg.epsilons, c.cfg.gain_target(), signal, c.params,
                                       SweepDirection::up, c.cfg.policy, c.threads);
  for (const auto& e : study.errors) log::warn("optimize: {}", e);
  write_thresholds(c, study);

  double n_min = INFINITY, n_max = -INFINITY;
  for (const auto& s : study.curves) {
    n_min = std::min(n_min, s.bias.n_p);
    n_max = std::max(n_max, s.bias.n_p);
  }
  CsvWriter w(c.path("optima.csv"),
              {"category", "eps_mhz", "np", "saturation_dbm", "p_minus_1db_dbm", "p_plus_1db_dbm",
               "rise_db", "np_range_fraction", "near_min_np"});
  OptimalBiases best;
  try {
    best = find_optimal_biases(study, c.cfg.optima);
  } catch (const EmptyCandidateSet& e) {
    c.err << "optimize: " << e.what() << "\n";
  }
  auto emit = [&](const char* name, const std::optional<Optimum>& o) {
    if (!o) {
      w.row({name, "", "", "", "", "", "", "", ""});
      return;
    }
    const double frac = n_max > n_min ? (o->n_p - n_min) / (n_max - n_min) : 0.0;
    w.row({name, c.num(angular_to_mhz(o->epsilon)), c.num(o->n_p), c.num(o->saturation_dbm),
           c.num(o->p_minus_1db), c.num(o->p_plus_1db), c.num(o->rise_db), c.num(frac),
           frac <= 0.25 ? "true" : "false"});
  };
  emit("monotone", best.monotone);
  emit("gain_rise", best.gain_rise);
  std::size_t total = 0;
  const std::size_t failures = study_failures(study, signal.size(), &total);
  return verdict(c, failures, total, "optimize");
}

int cmd_kerr_scaling(Context& c, const std::vector<double>& signal) {
  const auto rows = kerr_scaling_study(c.cfg.kerr_scales, c.cfg.epsilons, c.cfg.gain_target(),
                                       signal, c.params, c.cfg.optima, c.cfg.policy, c.threads);
  CsvWriter w(c.path("kerr_scaling.csv"),
              {"scale", "monotone_eps_mhz", "monotone_p_minus_1db_dbm", "rise_eps_mhz",
               "rise_p_pm1db_dbm"});
  for (const auto& r : rows) {
    std::optional<double> me, mp, re, rp;
    if (r.monotone) {
      me = angular_to_mhz(r.monotone->epsilon);
      mp = r.monotone->saturation_dbm;
    }
    if (r.gain_rise) {
      re = angular_to_mhz(r.gain_rise->epsilon);
      rp = r.gain_rise->saturation_dbm;
    }
    w.row({c.num(r.scale), c.num(me), c.num(mp), c.num(re), c.num(rp)});
  }
  return exit_ok;
}

int cmd_phase_map(Context& c, const std::vector<double>& signal) {
  const auto pts = transmission_map(c.cfg.epsilons, c.cfg.gain_target(), signal, c.params,
                                    c.cfg.policy, c.threads);
  CsvWriter w(c.path("phasemap.csv"), {"eps_mhz", "psig_dbm", "transmission_db", "phase_deg", "branch"});
  std::size_t failures = 0;
  for (const auto& p : pts) {
    if (p.branch == Branch::not_converged) ++failures;
    w.row({c.num(angular_to_mhz(p.epsilon)), c.num(p.psig_dbm), c.num(p.transmission_db),
           c.num(p.phase_deg), to_string(p.branch)});
  }
  const std::size_t total = c.cfg.epsilons.size() * signal.size();
  failures += total - pts.size();
  return verdict(c, failures, total, "phase-map");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Josephson parametric converter gain and saturation model", "kerrparamp"};
  app.require_subcommand(1);
  Options opt;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"derive-params", "mode frequencies, coupling, Kerr matrix"},
      {"gain-map", "small-signal peak gain versus pump detuning and photon number"},
      {"bias-contour", "iso-gain bias contours for a family of signal powers"},
      {"saturate", "saturation curves at the target-gain bias for every pump detuning"},
      {"optimize", "monotone and gain-rise optimal biases"},
      {"kerr-scaling", "optimal-bias saturation power versus Kerr scale"},
      {"phase-map", "transmission amplitude and relative phase versus signal power"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON run configuration")->required();
    sub->add_option("--out", opt.out_dir, "output directory (overrides config)");
    sub->add_option("--epsilon-mhz", opt.epsilon_mhz, "pump detunings, comma separated")
        ->delimiter(',');
    sub->add_option("--signal-dbm", opt.signal_dbm, "signal powers, comma separated")
        ->delimiter(',');
    sub->add_option("--sweep-direction", opt.direction, "up, down or both")
        ->check(CLI::IsMember({"up", "down", "both"}));
    sub->add_option("--signal-frequency", opt.frequency,
                    "fixed at the small-signal peak, or tracked to the large-signal peak")
        ->check(CLI::IsMember({"fixed", "tracked"}));
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 1024));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return exit_usage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  ModeParams params;
  try {
    cfg = parse_config(opt.config);
    if (!opt.epsilon_mhz.empty()) {
      std::vector<double> e = opt.epsilon_mhz;
      std::sort(e.begin(), e.end());
      e.erase(std::unique(e.begin(), e.end()), e.end());
      cfg.epsilons.clear();
      for (double v : e) cfg.epsilons.push_back(units::mhz_to_angular(v));
    }
    params = config_params(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }

  std::vector<double> sweep = cfg.signal_dbm;
  std::vector<double> contour = cfg.contour_signal_dbm;
  if (!opt.signal_dbm.empty()) {
    contour = opt.signal_dbm;
    sweep = opt.signal_dbm;
    for (std::size_t i = 1; i < sweep.size(); ++i)
      if (!(sweep[i] > sweep[i - 1]) && command != "bias-contour") {
        err << "config error: --signal-dbm must be strictly increasing\n";
        return exit_config;
      }
    if (sweep.size() < 2 && command != "bias-contour") {
      err << "config error: --signal-dbm needs at least two values for a sweep\n";
      return exit_config;
    }
  }

  Context ctx{cfg, params, fs::path(opt.out_dir.empty() ? cfg.output_dir : opt.out_dir),
              opt.threads, SweepDirection::up, SignalFrequency::fixed, out, err};
  if (opt.direction == "down") ctx.direction = SweepDirection::down;
  if (opt.direction == "both") ctx.direction = SweepDirection::both;
  if (opt.frequency == "tracked") ctx.frequency = SignalFrequency::tracked;

  try {
    fs::create_directories(ctx.dir);
    log::info("{}: {} pump detunings, {} threads", command, cfg.epsilons.size(), ctx.threads);
    if (command == "derive-params") return cmd_derive_params(ctx);
    if (command == "gain-map") return cmd_gain_map(ctx);
    if (command == "bias-contour") return cmd_bias_contour(ctx, contour);
    if (command == "saturate") return cmd_saturate(ctx, sweep);
    if (command == "optimize") return cmd_optimize(ctx, sweep);
    if (command == "kerr-scaling") return cmd_kerr_scaling(ctx, sweep);
    if (command == "phase-map") return cmd_phase_map(ctx, sweep);
  } catch (const Error& e) {
    err << command << ": " << e.what() << "\n";
    return exit_solver;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << "\n";
    return exit_solver;
  }
  return exit_usage;
}

}  // namespace kerrparamp
