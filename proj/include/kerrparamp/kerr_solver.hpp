#pragma once

#include <optional>
#include <vector>

#include "kerrparamp/circuit.hpp"
#include "kerrparamp/linear_solver.hpp"

namespace kerrparamp {

struct ContinuationPolicy {
  double tolerance = 1e-12;      ///< relative fixed-point residual
  int max_iterations = 200;
  double damping_floor = 1.0 / 64.0;
  double min_step_fraction = 1e-6;  ///< of the sweep span; smaller steps signal a fold
  double step_growth = 1.5;
  int growth_after = 3;             ///< consecutive successes before growing the step
  double max_shift_jump = 0.25;     ///< largest shift change per step, in units of min(kappa)
};

enum class Branch { lower, upper, not_converged };
const char* to_string(Branch b);

/// Real Kerr shifts of the signal and idler detunings (rad/s).
struct ShiftPair {
  double a = 0.0;
  double b = 0.0;
};

struct DriveResponse {
  std::complex<double> alpha;
  std::complex<double> beta;
  double delta_a = 0.0;
  double delta_b = 0.0;
  Branch branch = Branch::not_converged;
  int iterations = 0;
  double residual = 0.0;  ///< back-substitution error relative to sqrt(kappa_a)

  double gain() const { return std::norm(alpha); }
  bool converged() const { return branch != Branch::not_converged; }
};

/// Pump-induced Stark shifts 8 K_ac n_p and 8 K_bc n_p.
ShiftPair stark_shifts(const PumpBias& bias, const ModeParams& params);

double small_signal_gain_4(double delta, double epsilon, const PumpBias& bias,
                           const ModeParams& params);

/// First order in eps and Delta-kappa, exact in the Stark shifts at
/// eps = Delta-kappa = 0.
double peak_gain_detuning_4_analytic(double epsilon, const PumpBias& bias,
                                     const ModeParams& params);
PeakDetuning peak_gain_detuning_4(double epsilon, const PumpBias& bias,
                                  const ModeParams& params);

/// Shifts implied by a given (alpha, beta); n_a = |a_in|^2 / kappa_a.
ShiftPair kerr_shifts(const Scattering& s, const PumpBias& bias, double n_a,
                      const ModeParams& params);

/// Linear response with the signal and idler detunings moved by `shifts`.
Scattering response_at_shifts(double delta, double epsilon, const PumpBias& bias,
                              const ModeParams& params, const ShiftPair& shifts);

/// Fixed-point residual kerr_shifts(response_at_shifts(d)) - d.
ShiftPair shift_residual(double delta, double epsilon, const PumpBias& bias, double n_a,
                         const ModeParams& params, const ShiftPair& d);

/// Back-substitution error of the fourth-order Langevin pair, relative to
/// sqrt(kappa_a). The shifts are recomputed from (alpha, beta).
double langevin4_residual(double delta, double epsilon, const PumpBias& bias, double n_a,
                          const ModeParams& params, const Scattering& s);

/// Damped Newton on (delta_a, delta_b) from `seed`. Never throws for lack
/// of convergence; the branch field reports it.
DriveResponse newton_kerr(double delta, double epsilon, const PumpBias& bias, double n_a,
                          const ModeParams& params, const ContinuationPolicy& policy,
                          const ShiftPair& seed);

/// Solution connected to the small-signal state, reached by continuation
/// in n_a from zero. Throws NotConverged if continuation fails outright.
/// A fold crossed on the way is reported through `fold` and the result is
/// labelled upper.
DriveResponse solve_kerr_response(double delta, double epsilon, const PumpBias& bias, double n_a,
                                  const ModeParams& params,
                                  const ContinuationPolicy& policy = {}, bool* fold = nullptr);

enum class SweepDirection { up, down, both };

struct SignalSweep {
  std::vector<double> n_a;               ///< grid, increasing
  std::vector<DriveResponse> up;         ///< aligned with n_a
  std::vector<DriveResponse> down;       ///< aligned with n_a; empty unless requested
  std::vector<double> folds_up;          ///< n_a values where the up-sweep lost its branch
  std::vector<double> folds_down;
  /// Grid interval where converged up and down solutions differ.
  std::optional<std::pair<double, double>> hysteresis;
};

/// Fixed-frequency continuation along `n_a_grid` (strictly increasing,
/// first value small-signal). The down-sweep starts from the up-sweep's
/// final state when both are requested.
SignalSweep sweep_signal_power(double delta, double epsilon, const PumpBias& bias,
                               const std::vector<double>& n_a_grid, SweepDirection direction,
                               const ModeParams& params, const ContinuationPolicy& policy = {});

}  // namespace kerrparamp
