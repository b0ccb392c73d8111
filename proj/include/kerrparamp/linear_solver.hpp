#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "kerrparamp/circuit.hpp"

namespace kerrparamp {

/// Stiff pump: detuning eps = omega_p - omega_a - omega_b (rad/s) and
/// photon number n_p = <c^dag c>. The pump amplitude <c> is taken real.
struct PumpBias {
  double epsilon = 0.0;
  double n_p = 0.0;
};

/// alpha = a_out/a_in, beta = b_out^dag/a_in.
struct Scattering {
  std::complex<double> alpha;
  std::complex<double> beta;
};

/// Closed-form solution of the stiff-pump Langevin pair for the effective
/// mode detunings det_a (signal) and det_b (idler, conjugate side).
/// Throws CriticalPoint when the system is singular.
Scattering scattering_at(double det_a, double det_b, double g, double n_p, double kappa_a,
                         double kappa_b);

/// Numerator and denominator polynomials of the reflection gain in the
/// effective detunings. N - D = 16 g^2 n_p kappa_a kappa_b.
struct GainPolynomial {
  double numerator = 0.0;
  double denominator = 0.0;
  double scale = 0.0;  ///< magnitude of the largest term
};
GainPolynomial gain_polynomial(double det_a, double det_b, double g2n, double kappa_a,
                               double kappa_b);
/// d(denominator)/d(Delta) with d(det_a)/dDelta = 1, d(det_b)/dDelta = -1.
double gain_denominator_slope(double det_a, double det_b, double g2n, double kappa_a,
                              double kappa_b);
/// |alpha|^2 from the polynomials; CriticalPoint on a vanishing denominator.
double gain_from_detunings(double det_a, double det_b, double g2n, double kappa_a,
                           double kappa_b);

double reflection_gain_3(double delta, double epsilon, const PumpBias& bias,
                         const ModeParams& params);

Scattering linear_response_3(double delta, double epsilon, const PumpBias& bias,
                             const ModeParams& params);

/// Largest back-substitution error of the two third-order Langevin
/// equations, relative to sqrt(kappa_a).
double langevin3_residual(double delta, double epsilon, const PumpBias& bias,
                          const ModeParams& params, const Scattering& s);

struct PeakDetuning {
  double analytic = 0.0;  ///< first-order closed form
  double numeric = 0.0;   ///< maximizer of the exact gain; used downstream
  double gain = 0.0;      ///< gain at the numeric maximizer
};

/// Numeric maximizer over Delta for fixed Stark shifts; shared with the Kerr
/// small-signal gain. Bracket of width 4 kappa around the matched-detuning
/// point, golden-section, then polished on the root of d(gain)/dDelta.
std::pair<double, double> maximize_gain(double epsilon, double shift_a, double shift_b,
                                        double g2n, double kappa_a, double kappa_b);

double peak_gain_detuning_3_analytic(double epsilon, const PumpBias& bias,
                                     const ModeParams& params);
PeakDetuning peak_gain_detuning_3(double epsilon, const PumpBias& bias,
                                  const ModeParams& params);

/// Pump photon number at which the peak gain diverges, with constant
/// Stark shifts stark_a n_p and stark_b n_p on the two modes. Returns
/// +infinity when the gain stays bounded for every n_p.
double critical_pump_photons(double epsilon, const ModeParams& params, double stark_a = 0.0,
                             double stark_b = 0.0);

/// ((1 + r)/(1 - r))^2; requires 0 <= r < 1.
double gain_power_law(double ratio);

/// Least-squares critical power from (P_p, G) samples, residual measured in
/// ln G. Throws FitDiverged if the rms residual exceeds `max_rms_log_gain`.
double fit_critical_power(const std::vector<std::pair<double, double>>& samples,
                          double max_rms_log_gain = 0.05);

}  // namespace kerrparamp
