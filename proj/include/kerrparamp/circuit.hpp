#pragma once

#include <array>

namespace kerrparamp {

/// Physical circuit. SI units throughout, angular linewidths.
struct CircuitSpec {
  double E_J = 0.0;  ///< outer-junction Josephson energy (J)
  double L_a = 0.0, L_b = 0.0, L_c = 0.0;  ///< resonator inductances (H)
  double C_a = 0.0, C_b = 0.0, C_c = 0.0;  ///< resonator capacitances (F)
  double flux = 0.0;                       ///< external flux (Wb)
  double kappa_a = 0.0, kappa_b = 0.0;     ///< linewidths (rad/s)
};

/// Symmetric Kerr matrix (rad/s).
struct KerrMatrix {
  double aa = 0.0, bb = 0.0, cc = 0.0;
  double ab = 0.0, ac = 0.0, bc = 0.0;

  KerrMatrix scaled(double factor) const;
};

struct ModeParams {
  double omega_a = 0.0, omega_b = 0.0, omega_c = 0.0;
  double dressed_a = 0.0, dressed_b = 0.0, dressed_c = 0.0;
  double kappa_a = 0.0, kappa_b = 0.0;
  double g = 0.0;
  KerrMatrix K;
  double p_a = 0.0, p_b = 0.0, p_c = 0.0;
  double L_J = 0.0;
  double Z_a = 0.0, Z_b = 0.0, Z_c = 0.0;  ///< mode impedances sqrt(L'/C) (ohm)

  double kappa_mean() const { return 0.5 * (kappa_a + kappa_b); }
};

/// Throws FluxSingularity near cos(Phi_ext/4phi0) = 0, NonPhysical on a
/// non-positive or imaginary mode frequency, std::invalid_argument on
/// non-positive inputs.
ModeParams derive_mode_params(const CircuitSpec& spec);

/// Same parameters with every Kerr coefficient multiplied by `factor`;
/// dressed frequencies are recomputed.
ModeParams with_kerr_scale(const ModeParams& params, double factor);

/// Full trigonometric ring potential (J). Mode fluxes and Phi_ext in Wb.
double exact_jrm_energy(double flux_a, double flux_b, double flux_c,
                        double flux_ext, double E_J);

struct OracleCoefficients {
  int order = 0;
  /// Half the second derivative per mode (J/Wb^2), order 2.
  std::array<double, 3> quadratic{};
  /// d3H/dPhi_a dPhi_b dPhi_c (J/Wb^3) and the implied coupling, order 3.
  double cubic = 0.0;
  double g = 0.0;
  /// Kerr matrix from the quartic derivatives, order 4.
  KerrMatrix K;
};

/// Finite-difference Taylor coefficients of exact_jrm_energy at the origin,
/// mapped through participation ratios and zero-point amplitudes.
/// Throws StepSizeFailure when successive Richardson estimates disagree.
OracleCoefficients expansion_oracle(const CircuitSpec& spec, int order);

}  // namespace kerrparamp
