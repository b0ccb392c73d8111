#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kerrparamp/kerr_solver.hpp"

namespace kerrparamp {

struct BiasPoint {
  double epsilon = 0.0;     ///< rad/s
  double n_p = 0.0;
  double delta_maxg = 0.0;  ///< rad/s, small-signal peak
  double g_small = 1.0;     ///< power gain at (delta_maxg, n_a_ref)
  double n_a_ref = 0.0;
};

/// Lower-branch pump photon number whose small-signal peak gain equals
/// `gain_target` (power ratio). Throws NoSolution when unreachable.
BiasPoint find_bias_for_gain(double epsilon, double gain_target, double n_a_ref,
                             const ModeParams& params, const ContinuationPolicy& policy = {});

enum class LimitingSide { minus, plus, none };
const char* to_string(LimitingSide s);

struct CurvePoint {
  double n_a = 0.0;
  double psig_dbm = 0.0;
  double gain_db = 0.0;
  Branch branch = Branch::lower;
  double delta = 0.0;  ///< rad/s, signal detuning used at this point
};

struct SaturationCurve {
  BiasPoint bias;
  std::vector<CurvePoint> points;  ///< up-sweep, increasing n_a
  std::vector<CurvePoint> down;    ///< down-sweep when requested, increasing n_a
  std::optional<double> p_minus_1db, p_plus_1db;  ///< dBm
  LimitingSide limiting_side = LimitingSide::none;
  std::vector<double> folds_dbm;  ///< continuation failures, either direction
  std::optional<std::pair<double, double>> hysteresis_dbm;
  int failures = 0;  ///< non-converged points
};

struct Thresholds {
  std::optional<double> p_minus, p_plus;
  LimitingSide side = LimitingSide::none;
};

/// First crossings of G_small -/+ 1 dB, linear interpolation in (dBm, dB).
/// Throws MalformedCurve if the first point is more than 0.05 dB from
/// `g_small_db`.
Thresholds extract_p_pm1db(const std::vector<CurvePoint>& points, double g_small_db);

/// Signal power grid (dBm) spanning [start, stop] with `per_decade`
/// points covering every 10 dB, endpoints included.
std::vector<double> signal_grid_dbm(double start_dbm, double stop_dbm, int per_decade);

SaturationCurve saturation_curve(const BiasPoint& bias, const std::vector<double>& psig_dbm,
                                 SweepDirection direction, const ModeParams& params,
                                 const ContinuationPolicy& policy = {});

/// Alternative to the fixed-frequency sweep: at every signal power the
/// signal detuning is moved to the large-signal gain peak. Up-sweep only,
/// each point solved from zero signal.
SaturationCurve tracked_saturation_curve(const BiasPoint& bias,
                                         const std::vector<double>& psig_dbm,
                                         const ModeParams& params,
                                         const ContinuationPolicy& policy = {});

/// One (eps, n_p) cell of the small-signal gain map.
struct GainCell {
  double epsilon = 0.0;
  double n_p = 0.0;
  std::optional<double> gain_db;       ///< empty at or above the critical pump
  std::optional<double> delta_maxg;
};

std::vector<GainCell> gain_map(const std::vector<double>& epsilons,
                               const std::vector<double>& n_p_grid, const ModeParams& params,
                               int threads = 1);

struct ContourPoint {
  double epsilon = 0.0;
  double psig_dbm = 0.0;
  std::optional<double> n_p;
  std::optional<double> delta_maxg;
};

/// Iso-gain contour per signal power: the lower-branch n_p at which the
/// peak over signal detuning of the large-signal gain equals the target.
std::vector<ContourPoint> bias_contour(const std::vector<double>& epsilons, double gain_target,
                                       const std::vector<double>& psig_dbm,
                                       const ModeParams& params,
                                       const ContinuationPolicy& policy = {}, int threads = 1);

struct OptimaSettings {
  double monotone_tolerance_db = 0.1;  ///< largest rise still counted as monotone
};

struct BiasStudy {
  std::vector<SaturationCurve> curves;  ///< one per epsilon, sorted by epsilon
  std::vector<std::string> errors;      ///< epsilons without a bias point
};

enum class SignalFrequency { fixed, tracked };

/// Bias plus saturation curve per epsilon. Tracked frequency ignores the
/// sweep direction.
BiasStudy study_biases(const std::vector<double>& epsilons, double gain_target,
                       const std::vector<double>& psig_dbm, const ModeParams& params,
                       SweepDirection direction, const ContinuationPolicy& policy = {},
                       int threads = 1, SignalFrequency frequency = SignalFrequency::fixed);

struct Optimum {
  double epsilon = 0.0;
  double n_p = 0.0;
  double saturation_dbm = 0.0;  ///< P-1dB, or the limiting P+-1dB for the rise category
  std::optional<double> p_minus_1db, p_plus_1db;
  double rise_db = 0.0;         ///< largest excess over G_small before falling
};

struct OptimalBiases {
  std::optional<Optimum> monotone;
  std::optional<Optimum> gain_rise;
};

/// Largest excess over G_small (dB) before the first -1 dB crossing.
double peak_rise_db(const SaturationCurve& curve);

/// Throws EmptyCandidateSet if neither category has a candidate; a single
/// empty category is returned as an empty optional.
OptimalBiases find_optimal_biases(const BiasStudy& study, const OptimaSettings& settings = {});

struct TransmissionPoint {
  double epsilon = 0.0;
  double psig_dbm = 0.0;
  double transmission_db = 0.0;
  double phase_deg = 0.0;  ///< relative to the first (small-signal) point
  Branch branch = Branch::lower;
};

std::vector<TransmissionPoint> transmission_map(const std::vector<double>& epsilons,
                                                double gain_target,
                                                const std::vector<double>& psig_dbm,
                                                const ModeParams& params,
                                                const ContinuationPolicy& policy = {},
                                                int threads = 1);

struct ScalingRow {
  double scale = 0.0;
  std::optional<Optimum> monotone;
  std::optional<Optimum> gain_rise;
};

/// Re-runs the optimal-bias analysis with all Kerr terms multiplied by each
/// scale. The signal grid moves up by -10 log10(scale) dB so the same
/// photon-number window is covered.
std::vector<ScalingRow> kerr_scaling_study(const std::vector<double>& scales,
                                           const std::vector<double>& epsilons,
                                           double gain_target,
                                           const std::vector<double>& psig_dbm,
                                           const ModeParams& params,
                                           const OptimaSettings& settings = {},
                                           const ContinuationPolicy& policy = {},
                                           int threads = 1);

/// Runs fn(0..count-1) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace kerrparamp
