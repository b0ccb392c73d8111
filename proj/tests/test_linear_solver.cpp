#include <doctest.h>

#include <cmath>
#include <random>

#include "kerrparamp/errors.hpp"
#include "kerrparamp/linear_solver.hpp"
#include "kerrparamp/units.hpp"
#include "oracles.hpp"

using namespace kerrparamp;

namespace {

ModeParams toy(double kappa_a, double kappa_b, double g = 1.0) {
  ModeParams p;
  p.kappa_a = kappa_a;
  p.kappa_b = kappa_b;
  p.g = g;
  p.omega_a = 1e3;
  return p;
}

ModeParams device_like() {
  ModeParams p;
  p.kappa_a = units::mhz_to_angular(20.27);
  p.kappa_b = units::mhz_to_angular(62.17);
  p.g = units::mhz_to_angular(-5.171337152907);
  p.omega_a = units::ghz_to_angular(5.0847);
  return p;
}

// n_p giving 4 g^2 n_p / (kappa_a kappa_b) = r
double n_for_ratio(const ModeParams& p, double r) {
  return r * p.kappa_a * p.kappa_b / (4 * p.g * p.g);
}

}  // namespace

TEST_CASE("zero pump gives unit gain") {
  const ModeParams p = device_like();
  for (double d : {-3e7, 0.0, 1e8})
    for (double e : {-5e7, 0.0, 2e7}) CHECK(reflection_gain_3(d, e, {e, 0.0}, p) == doctest::Approx(1.0));
}

TEST_CASE("resonant gain values") {
  const ModeParams p = toy(1.0, 1.0);
  // 4 g^2 n_p = kappa^2 / 3
  CHECK(reflection_gain_3(0, 0, {0, 1.0 / 12.0}, p) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(reflection_gain_3(0, 0, {0, n_for_ratio(p, 9.0 / 11.0)}, p) ==
        doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(reflection_gain_3(0, 0, {0, n_for_ratio(p, 1.0)}, p), CriticalPoint);
}

TEST_CASE("closed form agrees with the direct Langevin solve") {
  const ModeParams p = device_like();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> det(-1e8, 1e8), r(0.0, 0.95);
  for (int i = 0; i < 200; ++i) {
    const double d = det(rng), e = det(rng);
    const PumpBias b{e, n_for_ratio(p, r(rng))};
    const Scattering s = linear_response_3(d, e, b, p);
    const Scattering o = oracle::langevin_direct(d, e - d, p.g, b.n_p, p.kappa_a, p.kappa_b);
    CHECK(std::abs(s.alpha - o.alpha) <= 1e-10 * std::abs(o.alpha) + 1e-12);
    CHECK(std::abs(s.beta - o.beta) <= 1e-10 * std::abs(o.beta) + 1e-12);
    CHECK(reflection_gain_3(d, e, b, p) == doctest::Approx(std::norm(o.alpha)).epsilon(1e-9));
    CHECK(langevin3_residual(d, e, b, p, s) < 1e-12);
    // phase-preserving amplification: |alpha|^2 - |beta|^2 = 1
    CHECK(std::norm(s.alpha) - std::norm(s.beta) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("exchange symmetry of the gain") {
  ModeParams p = device_like();
  ModeParams q = p;
  std::swap(q.kappa_a, q.kappa_b);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> det(-5e7, 5e7);
  for (int i = 0; i < 50; ++i) {
    const double d = det(rng), e = det(rng);
    const PumpBias b{e, n_for_ratio(p, 0.7)};
    CHECK(reflection_gain_3(d, e, b, p) == doctest::Approx(reflection_gain_3(e - d, e, b, q)).epsilon(1e-12));
  }
}

TEST_CASE("gain increases with pump below critical") {
  const ModeParams p = device_like();
  double last = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double g = reflection_gain_3(0, 0, {0, n_for_ratio(p, 0.0099 * k)}, p);
    CHECK(g > last);
    last = g;
  }
}

TEST_CASE("peak detuning") {
  SUBCASE("equal linewidths put the analytic peak at eps/2") {
    const ModeParams p = toy(2.0, 2.0);
    const PumpBias b{0.3, n_for_ratio(p, 0.8)};
    CHECK(peak_gain_detuning_3_analytic(0.3, b, p) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(peak_gain_detuning_3(0.3, b, p).numeric == doctest::Approx(0.15).epsilon(1e-9));
  }
  SUBCASE("zero pump detuning peaks at zero") {
    const ModeParams p = device_like();
    const PeakDetuning pk = peak_gain_detuning_3(0.0, {0.0, n_for_ratio(p, 0.8)}, p);
    CHECK(std::abs(pk.numeric) < 1e-6 * p.kappa_a);
  }
  SUBCASE("numeric maximum beats a dense scan") {
    const ModeParams p = device_like();
    const double eps = units::mhz_to_angular(2.0);
    const PumpBias b{eps, n_for_ratio(p, 0.8)};
    const PeakDetuning pk = peak_gain_detuning_3(eps, b, p);
    double best = 0.0;
    for (int i = -20000; i <= 20000; ++i) {
      const double d = pk.numeric + i * 1e-5 * p.kappa_a;
      best = std::max(best, reflection_gain_3(d, eps, b, p));
    }
    CHECK(pk.gain >= best * (1 - 1e-14));
    CHECK(pk.numeric == doctest::Approx(pk.analytic).epsilon(0.05));
  }
}

TEST_CASE("critical pump") {
  const ModeParams p = device_like();
  const double eps = units::mhz_to_angular(3.0);
  const double nc = critical_pump_photons(eps, p);
  const double ka = p.kappa_a, kb = p.kappa_b;
  CHECK(nc == doctest::Approx(ka * kb * (1 + 4 * eps * eps / ((ka + kb) * (ka + kb))) /
                              (4 * p.g * p.g)));
  // peak gain grows without bound towards it
  const double g1 = peak_gain_detuning_3(eps, {eps, 0.999 * nc}, p).gain;
  const double g2 = peak_gain_detuning_3(eps, {eps, 0.99999 * nc}, p).gain;
  CHECK(g2 > 50 * g1 / 2);
  // with Stark shifts the quadratic root applies
  const double sa = 1e3, sb = 2e3;
  const double ncs = critical_pump_photons(eps, p, sa, sb);
  const double E = eps + (sa + sb) * ncs;
  CHECK(4 * p.g * p.g * ncs == doctest::Approx(ka * kb * (1 + 4 * E * E / ((ka + kb) * (ka + kb)))));
}

TEST_CASE("gain power law") {
  CHECK(gain_power_law(0.0) == 1.0);
  CHECK(gain_power_law(9.0 / 11.0) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK_THROWS_AS(gain_power_law(1.0), std::invalid_argument);
  // matches the closed form at resonance
  const ModeParams p = toy(1.3, 1.3);
  for (double r = 0.1; r < 0.95; r += 0.1)
    CHECK(reflection_gain_3(0, 0, {0, n_for_ratio(p, r)}, p) ==
          doctest::Approx(gain_power_law(r)).epsilon(1e-12));
}

TEST_CASE("critical power fit round-trip") {
  for (std::uint32_t seed : {1u, 2u, 3u, 4u}) {
    const auto samples = oracle::power_law_samples(1.0, 0.01, 25, seed);
    CHECK(fit_critical_power(samples) == doctest::Approx(1.0).epsilon(0.02));
  }
  const auto exact = oracle::power_law_samples(2.5, 0.0, 10, 9);
  CHECK(fit_critical_power(exact) == doctest::Approx(2.5).epsilon(1e-6));
  CHECK_THROWS_AS(fit_critical_power({{1, 1}, {2, 1.5}}), std::invalid_argument);
  // data that no power law describes
  CHECK_THROWS_AS(fit_critical_power({{1, 1.0}, {2, 50.0}, {3, 51.0}, {4, 52.0}}), FitDiverged);
}
