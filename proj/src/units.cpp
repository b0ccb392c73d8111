#include "kerrparamp/units.hpp"

#include <cmath>

namespace kerrparamp::units {

double flux_from_quanta(double quanta) { return quanta * Phi0; }

double bias_phase(double flux_weber) { return flux_weber / (4.0 * phi0); }

double ghz_to_angular(double ghz) { return two_pi * ghz * 1e9; }
double mhz_to_angular(double mhz) { return two_pi * mhz * 1e6; }
double angular_to_ghz(double omega) { return omega / two_pi * 1e-9; }
double angular_to_mhz(double omega) { return omega / two_pi * 1e-6; }

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }
double power_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double signal_strength_from_dbm(double dbm, double omega_a, double kappa_a) {
  return dbm_to_watts(dbm) / (hbar * omega_a * kappa_a);
}

double signal_dbm_from_strength(double n_a, double omega_a, double kappa_a) {
  return watts_to_dbm(n_a * hbar * omega_a * kappa_a);
}

}  // namespace kerrparamp::units
