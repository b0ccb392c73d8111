#include "kerrparamp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "kerrparamp/errors.hpp"
#include "kerrparamp/log.hpp"
#include "kerrparamp/peak_search.hpp"
#include "kerrparamp/units.hpp"

namespace kerrparamp {

const char* to_string(LimitingSide s) {
  switch (s) {
    case LimitingSide::minus: return "minus";
    case LimitingSide::plus: return "plus";
    case LimitingSide::none: return "none";
  }
  return "unknown";
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::pair<double, double> small_signal_peak(double epsilon, double n_p, const ModeParams& p) {
  return maximize_gain(epsilon, 8.0 * p.K.ac * n_p, 8.0 * p.K.bc * n_p, p.g * p.g * n_p,
                       p.kappa_a, p.kappa_b);
}

double stark_critical(double epsilon, const ModeParams& p) {
  return critical_pump_photons(epsilon, p, 8.0 * p.K.ac, 8.0 * p.K.bc);
}

}  // namespace

BiasPoint find_bias_for_gain(double epsilon, double gain_target, double n_a_ref,
                             const ModeParams& params, const ContinuationPolicy& policy) {
  if (!(gain_target >= 1.0)) throw std::invalid_argument("gain target must be at least 1");
  BiasPoint out;
  out.epsilon = epsilon;
  out.n_a_ref = n_a_ref;

  double n_p = 0.0;
  if (gain_target > 1.0) {
    const double log_target = std::log(gain_target);
    // gain at the reference strength, signal held at the small-signal peak
    auto excess = [&](double n) {
      try {
        const double d = small_signal_peak(epsilon, n, params).first;
        const double g =
            n_a_ref > 0.0
                ? solve_kerr_response(d, epsilon, PumpBias{epsilon, n}, n_a_ref, params, policy).gain()
                : small_signal_peak(epsilon, n, params).second;
        return std::log(g) - log_target;
      } catch (const CriticalPoint&) {
        return std::numeric_limits<double>::infinity();
      } catch (const NotConverged&) {
        return std::numeric_limits<double>::infinity();
      }
    };

    double hi = stark_critical(epsilon, params);
    if (std::isfinite(hi)) {
      hi *= 1.0 - 1e-9;
    } else {
      // bounded gain: grow from the third-order estimate until the target is passed
      hi = critical_pump_photons(epsilon, params);
      if (!std::isfinite(hi)) throw NoSolution("no pump coupling at this operating point");
      int k = 0;
      while (excess(hi) < 0.0 && ++k < 60) hi *= 2.0;
    }
    if (!(hi > 0.0) || excess(hi) < 0.0)
      throw NoSolution("gain target unreachable below the critical pump");

    // lowest crossing: coarse scan from zero, then a bracketed root
    const int scan = 64;
    double lo = 0.0;
    double upper = hi;
    for (int i = 1; i <= scan; ++i) {
      const double n = hi * i / scan;
      if (excess(n) >= 0.0) {
        upper = n;
        break;
      }
      lo = n;
    }
    n_p = bracketed_root(excess, lo, upper);
  }

  out.n_p = n_p;
  out.delta_maxg = small_signal_peak(epsilon, n_p, params).first;
  const PumpBias bias{epsilon, n_p};
  out.g_small = solve_kerr_response(out.delta_maxg, epsilon, bias, n_a_ref, params, policy).gain();
  return out;
}

std::vector<double> signal_grid_dbm(double start_dbm, double stop_dbm, int per_decade) {
  if (!(stop_dbm > start_dbm) || per_decade < 2)
    throw std::invalid_argument("signal grid needs stop > start and at least 2 points per decade");
  const double step = 10.0 / (per_decade - 1);
  const auto intervals = static_cast<long>(std::ceil((stop_dbm - start_dbm) / step - 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(intervals) + 1);
  for (long i = 0; i <= intervals; ++i) out.push_back(std::min(start_dbm + i * step, stop_dbm));
  return out;
}

Thresholds extract_p_pm1db(const std::vector<CurvePoint>& points, double g_small_db) {
  if (points.empty()) throw MalformedCurve("empty saturation curve");
  if (!(std::abs(points.front().gain_db - g_small_db) <= 0.05))
    throw MalformedCurve("first curve point is not at the small-signal gain");

  Thresholds out;
  const double low = g_small_db - 1.0;
  const double high = g_small_db + 1.0;
  const CurvePoint* prev = &points.front();
  for (std::size_t i = 1; i < points.size(); ++i) {
    const CurvePoint& p = points[i];
    if (p.branch == Branch::not_converged || !std::isfinite(p.gain_db)) continue;
    auto cross = [&](double level) {
      const double t = (level - prev->gain_db) / (p.gain_db - prev->gain_db);
      return prev->psig_dbm + t * (p.psig_dbm - prev->psig_dbm);
    };
    if (!out.p_minus && p.gain_db <= low) out.p_minus = cross(low);
    if (!out.p_plus && p.gain_db >= high) out.p_plus = cross(high);
    if (out.p_minus && out.p_plus) break;
    prev = &p;
  }
  if (out.p_minus && (!out.p_plus || *out.p_minus < *out.p_plus))
    out.side = LimitingSide::minus;
  else if (out.p_plus)
    out.side = LimitingSide::plus;
  return out;
}

SaturationCurve saturation_curve(const BiasPoint& bias, const std::vector<double>& psig_dbm,
                                 SweepDirection direction, const ModeParams& params,
                                 const ContinuationPolicy& policy) {
  SaturationCurve out;
  out.bias = bias;
  std::vector<double> n_a;
  n_a.reserve(psig_dbm.size());
  for (double p : psig_dbm)
    n_a.push_back(units::signal_strength_from_dbm(p, params.omega_a, params.kappa_a));

  const PumpBias pump{bias.epsilon, bias.n_p};
  const SignalSweep sweep =
      sweep_signal_power(bias.delta_maxg, bias.epsilon, pump, n_a, direction, params, policy);

  auto to_points = [&](const std::vector<DriveResponse>& rs) {
    std::vector<CurvePoint> pts;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      CurvePoint c;
      c.n_a = n_a[i];
      c.psig_dbm = psig_dbm[i];
      c.branch = rs[i].branch;
      c.delta = bias.delta_maxg;
      c.gain_db = rs[i].converged() ? units::power_to_db(rs[i].gain())
                                    : std::numeric_limits<double>::quiet_NaN();
      if (!rs[i].converged()) ++out.failures;
      pts.push_back(c);
    }
    return pts;
  };
  const bool want_up = direction != SweepDirection::down;
  if (want_up) out.points = to_points(sweep.up);
  out.down = to_points(sweep.down);

  auto dbm = [&](double n) {
    return units::signal_dbm_from_strength(n, params.omega_a, params.kappa_a);
  };
  for (double f : sweep.folds_up)
    if (f > 0.0) out.folds_dbm.push_back(dbm(f));
  for (double f : sweep.folds_down)
    if (f > 0.0) out.folds_dbm.push_back(dbm(f));
  if (sweep.hysteresis)
    out.hysteresis_dbm = std::make_pair(dbm(sweep.hysteresis->first), dbm(sweep.hysteresis->second));

  const std::vector<CurvePoint>& ref = want_up ? out.points : out.down;
  if (want_up) {
    const Thresholds t = extract_p_pm1db(ref, units::power_to_db(bias.g_small));
    out.p_minus_1db = t.p_minus;
    out.p_plus_1db = t.p_plus;
    out.limiting_side = t.side;
  }
  return out;
}

std::vector<GainCell> gain_map(const std::vector<double>& epsilons,
                               const std::vector<double>& n_p_grid, const ModeParams& params,
                               int threads) {
  std::vector<GainCell> cells(epsilons.size() * n_p_grid.size());
  parallel_for(epsilons.size(), threads, [&](std::size_t i) {
    const double eps = epsilons[i];
    const double n_crit = stark_critical(eps, params);
    for (std::size_t j = 0; j < n_p_grid.size(); ++j) {
      GainCell& c = cells[i * n_p_grid.size() + j];
      c.epsilon = eps;
      c.n_p = n_p_grid[j];
      if (!(c.n_p < n_crit)) continue;
      try {
        const auto [d, g] = small_signal_peak(eps, c.n_p, params);
        c.gain_db = units::power_to_db(g);
        c.delta_maxg = d;
      } catch (const Error&) {
      }
    }
  });
  return cells;
}

namespace {

// Peak over signal detuning of the large-signal gain at fixed pump.
double large_signal_peak(double epsilon, double n_p, double n_a, const ModeParams& params,
                         const ContinuationPolicy& policy, double* where) {
  const double center = small_signal_peak(epsilon, n_p, params).first;
  const double kappa = params.kappa_mean();
  const PumpBias bias{epsilon, n_p};
  auto gain = [&](double d) {
    try {
      return solve_kerr_response(d, epsilon, bias, n_a, params, policy).gain();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const Maximum m =
      golden_section_maximize(gain, center - 2.0 * kappa, center + 2.0 * kappa, 41, 1e-7 * kappa);
  if (where) *where = m.x;
  return m.value;
}

}  // namespace

SaturationCurve tracked_saturation_curve(const BiasPoint& bias,
                                         const std::vector<double>& psig_dbm,
                                         const ModeParams& params,
                                         const ContinuationPolicy& policy) {
  SaturationCurve out;
  out.bias = bias;
  for (double p : psig_dbm) {
    CurvePoint c;
    c.psig_dbm = p;
    c.n_a = units::signal_strength_from_dbm(p, params.omega_a, params.kappa_a);
    try {
      double where = bias.delta_maxg;
      const double g = large_signal_peak(bias.epsilon, bias.n_p, c.n_a, params, policy, &where);
      if (!std::isfinite(g)) throw NotConverged("no converged point near the gain peak");
      bool fold = false;
      c.branch = solve_kerr_response(where, bias.epsilon, {bias.epsilon, bias.n_p}, c.n_a, params,
                                     policy, &fold)
                     .branch;
      c.delta = where;
      c.gain_db = units::power_to_db(g);
    } catch (const Error&) {
      c.branch = Branch::not_converged;
      c.gain_db = std::numeric_limits<double>::quiet_NaN();
      ++out.failures;
    }
    out.points.push_back(c);
  }
  const Thresholds t = extract_p_pm1db(out.points, units::power_to_db(bias.g_small));
  out.p_minus_1db = t.p_minus;
  out.p_plus_1db = t.p_plus;
  out.limiting_side = t.side;
  return out;
}

std::vector<ContourPoint> bias_contour(const std::vector<double>& epsilons, double gain_target,
                                       const std::vector<double>& psig_dbm,
                                       const ModeParams& params,
                                       const ContinuationPolicy& policy, int threads) {
  std::vector<ContourPoint> out(epsilons.size() * psig_dbm.size());
  const double n_ref = psig_dbm.empty() ? 0.0
                                        : units::signal_strength_from_dbm(
                                              psig_dbm.front(), params.omega_a, params.kappa_a);
  parallel_for(epsilons.size(), threads, [&](std::size_t i) {
    const double eps = epsilons[i];
    std::optional<BiasPoint> small;
    try {
      small = find_bias_for_gain(eps, gain_target, n_ref, params, policy);
    } catch (const Error& e) {
      log::debug("bias contour: no small-signal bias at eps = {} MHz: {}",
                 units::angular_to_mhz(eps), e.what());
    }
    const double n_crit = stark_critical(eps, params);
    for (std::size_t j = 0; j < psig_dbm.size(); ++j) {
      ContourPoint& c = out[i * psig_dbm.size() + j];
      c.epsilon = eps;
      c.psig_dbm = psig_dbm[j];
      if (!small) continue;
      const double n_a =
          units::signal_strength_from_dbm(psig_dbm[j], params.omega_a, params.kappa_a);
      const double log_target = std::log(gain_target);
      auto excess = [&](double n_p) {
        try {
          return std::log(large_signal_peak(eps, n_p, n_a, params, policy, nullptr)) - log_target;
        } catch (const Error&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      };
      const double lo = 0.5 * small->n_p;
      const double hi = std::isfinite(n_crit) ? n_crit * (1.0 - 1e-6) : 4.0 * small->n_p;
      // lowest crossing on a coarse scan, then a bracketed root
      const int scan = 24;
      double a = lo;
      double fa = excess(a);
      if (!(fa < 0.0)) continue;
      for (int k = 1; k <= scan; ++k) {
        const double b = lo + (hi - lo) * k / scan;
        const double fb = excess(b);
        if (std::isnan(fb)) continue;
        if (fb >= 0.0) {
          try {
            const double root = bracketed_root(
                [&](double n) {
                  const double v = excess(n);
                  return std::isnan(v) ? 1.0 : v;
                },
                a, b);
            double where = 0.0;
            large_signal_peak(eps, root, n_a, params, policy, &where);
            c.n_p = root;
            c.delta_maxg = where;
          } catch (const Error&) {
          }
          break;
        }
        a = b;
      }
    }
  });
  return out;
}

BiasStudy study_biases(const std::vector<double>& epsilons, double gain_target,
                       const std::vector<double>& psig_dbm, const ModeParams& params,
                       SweepDirection direction, const ContinuationPolicy& policy, int threads,
                       SignalFrequency frequency) {
  std::vector<double> eps_sorted = epsilons;
  std::sort(eps_sorted.begin(), eps_sorted.end());
  eps_sorted.erase(std::unique(eps_sorted.begin(), eps_sorted.end()), eps_sorted.end());
  const double n_ref =
      units::signal_strength_from_dbm(psig_dbm.front(), params.omega_a, params.kappa_a);

  std::vector<std::optional<SaturationCurve>> slots(eps_sorted.size());
  std::vector<std::string> errs(eps_sorted.size());
  parallel_for(eps_sorted.size(), threads, [&](std::size_t i) {
    try {
      const BiasPoint b = find_bias_for_gain(eps_sorted[i], gain_target, n_ref, params, policy);
      slots[i] = frequency == SignalFrequency::tracked
                     ? tracked_saturation_curve(b, psig_dbm, params, policy)
                     : saturation_curve(b, psig_dbm, direction, params, policy);
    } catch (const Error& e) {
      errs[i] = e.what();
    }
  });

  BiasStudy out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      out.curves.push_back(std::move(*slots[i]));
    } else {
      out.errors.push_back("eps " + std::to_string(units::angular_to_mhz(eps_sorted[i])) +
                           " MHz: " + errs[i]);
    }
  }
  return out;
}

double peak_rise_db(const SaturationCurve& curve) {
  const double g = units::power_to_db(curve.bias.g_small);
  double rise = -std::numeric_limits<double>::infinity();
  for (const CurvePoint& p : curve.points) {
    if (p.branch == Branch::not_converged) continue;
    if (p.gain_db < g - 1.0) break;
    rise = std::max(rise, p.gain_db - g);
  }
  return rise;
}

OptimalBiases find_optimal_biases(const BiasStudy& study, const OptimaSettings& settings) {
  OptimalBiases out;
  for (const SaturationCurve& c : study.curves) {
    if (!c.p_minus_1db || c.p_plus_1db) continue;
    Optimum o;
    o.epsilon = c.bias.epsilon;
    o.n_p = c.bias.n_p;
    o.p_minus_1db = c.p_minus_1db;
    o.p_plus_1db = c.p_plus_1db;
    o.saturation_dbm = *c.p_minus_1db;
    o.rise_db = peak_rise_db(c);
    if (o.rise_db <= settings.monotone_tolerance_db) {
      if (!out.monotone || o.saturation_dbm > out.monotone->saturation_dbm) out.monotone = o;
    } else if (o.rise_db < 1.0) {
      if (!out.gain_rise || o.saturation_dbm > out.gain_rise->saturation_dbm) out.gain_rise = o;
    }
  }
  if (!out.monotone && !out.gain_rise)
    throw EmptyCandidateSet("no saturation curve qualifies for either optimum");
  return out;
}

std::vector<TransmissionPoint> transmission_map(const std::vector<double>& epsilons,
                                                double gain_target,
                                                const std::vector<double>& psig_dbm,
                                                const ModeParams& params,
                                                const ContinuationPolicy& policy, int threads) {
  std::vector<double> eps_sorted = epsilons;
  std::sort(eps_sorted.begin(), eps_sorted.end());
  eps_sorted.erase(std::unique(eps_sorted.begin(), eps_sorted.end()), eps_sorted.end());
  std::vector<double> n_a;
  for (double p : psig_dbm)
    n_a.push_back(units::signal_strength_from_dbm(p, params.omega_a, params.kappa_a));

  std::vector<std::vector<TransmissionPoint>> rows(eps_sorted.size());
  parallel_for(eps_sorted.size(), threads, [&](std::size_t i) {
    const double eps = eps_sorted[i];
    BiasPoint b;
    try {
      b = find_bias_for_gain(eps, gain_target, n_a.front(), params, policy);
    } catch (const Error& e) {
      log::warn("phase map: skipping eps = {} MHz: {}", units::angular_to_mhz(eps), e.what());
      return;
    }
    const SignalSweep s = sweep_signal_power(b.delta_maxg, eps, PumpBias{eps, b.n_p}, n_a,
                                             SweepDirection::up, params, policy);
    const double ref_phase = std::arg(s.up.front().beta);
    double prev = 0.0;
    for (std::size_t k = 0; k < n_a.size(); ++k) {
      const DriveResponse& r = s.up[k];
      TransmissionPoint t;
      t.epsilon = eps;
      t.psig_dbm = psig_dbm[k];
      t.branch = r.branch;
      if (r.converged()) {
        t.transmission_db = units::power_to_db(std::norm(r.beta));
        // unwrap along the sweep
        double ph = std::arg(r.beta) - ref_phase;
        ph -= units::two_pi * std::round((ph - prev) / units::two_pi);
        prev = ph;
        t.phase_deg = ph * 180.0 / units::pi;
      } else {
        t.transmission_db = std::numeric_limits<double>::quiet_NaN();
        t.phase_deg = std::numeric_limits<double>::quiet_NaN();
      }
      rows[i].push_back(t);
    }
  });
  std::vector<TransmissionPoint> out;
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<ScalingRow> kerr_scaling_study(const std::vector<double>& scales,
                                           const std::vector<double>& epsilons,
                                           double gain_target,
                                           const std::vector<double>& psig_dbm,
                                           const ModeParams& params,
                                           const OptimaSettings& settings,
                                           const ContinuationPolicy& policy, int threads) {
  std::vector<ScalingRow> out;
  for (double scale : scales) {
    if (!(scale >= 0.0)) throw std::invalid_argument("Kerr scale must be non-negative");
    ScalingRow row;
    row.scale = scale;
    const ModeParams scaled = with_kerr_scale(params, scale);
    const double shift = scale > 0.0 ? -10.0 * std::log10(scale) : 0.0;
    std::vector<double> grid = psig_dbm;
    for (double& p : grid) p += shift;
    const BiasStudy study =
        study_biases(epsilons, gain_target, grid, scaled, SweepDirection::up, policy, threads);
    try {
      const OptimalBiases o = find_optimal_biases(study, settings);
      row.monotone = o.monotone;
      row.gain_rise = o.gain_rise;
    } catch (const EmptyCandidateSet&) {
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace kerrparamp
