#include <doctest.h>

#include <cmath>

#include "kerrparamp/units.hpp"

using namespace kerrparamp;

TEST_CASE("flux quantum bookkeeping") {
  CHECK(units::Phi0 == doctest::Approx(2.067833848e-15).epsilon(1e-9));
  CHECK(units::phi0 == doctest::Approx(units::Phi0 / (2 * units::pi)).epsilon(1e-15));
  // 1 Phi0 of external flux is a quarter turn of the bias phase
  CHECK(units::bias_phase(units::flux_from_quanta(1.0)) == doctest::Approx(units::pi / 2));
  CHECK(units::bias_phase(units::flux_from_quanta(0.5)) == doctest::Approx(units::pi / 4));
  CHECK(std::cos(units::bias_phase(units::flux_from_quanta(1.2))) ==
        doctest::Approx(std::cos(0.6 * units::pi)));
}

TEST_CASE("frequency and power conversions round-trip") {
  CHECK(units::angular_to_ghz(units::ghz_to_angular(5.0847)) == doctest::Approx(5.0847));
  CHECK(units::mhz_to_angular(1.0) == doctest::Approx(2e6 * units::pi));
  CHECK(units::dbm_to_watts(0.0) == doctest::Approx(1e-3));
  CHECK(units::watts_to_dbm(1e-17) == doctest::Approx(-140.0));
  const double w = units::ghz_to_angular(5.0);
  const double k = units::mhz_to_angular(20.0);
  const double n = units::signal_strength_from_dbm(-123.4, w, k);
  CHECK(n * units::hbar * w * k == doctest::Approx(units::dbm_to_watts(-123.4)));
  CHECK(units::signal_dbm_from_strength(n, w, k) == doctest::Approx(-123.4));
}
