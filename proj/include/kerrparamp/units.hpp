#pragma once

#include <numbers>

namespace kerrparamp::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double electron_charge = 1.602176634e-19;  // C

/// Reduced flux quantum hbar/2e (Wb). Internal flux unit.
inline constexpr double phi0 = hbar / (2.0 * electron_charge);
/// Flux quantum h/2e (Wb). Config flux unit.
inline constexpr double Phi0 = two_pi * phi0;

/// Flux in units of Phi0 -> webers.
double flux_from_quanta(double quanta);
/// Phase Phi_ext / (4 phi0) entering the ring potential.
double bias_phase(double flux_weber);

double ghz_to_angular(double ghz);
double mhz_to_angular(double mhz);
double angular_to_ghz(double omega);
double angular_to_mhz(double omega);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double power_to_db(double ratio);

/// Signal strength n_a for a given input power; P = n_a hbar omega_a kappa_a.
double signal_strength_from_dbm(double dbm, double omega_a, double kappa_a);
double signal_dbm_from_strength(double n_a, double omega_a, double kappa_a);

}  // namespace kerrparamp::units
