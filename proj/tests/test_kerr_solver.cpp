#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kerrparamp/errors.hpp"
#include "kerrparamp/kerr_solver.hpp"
#include "kerrparamp/units.hpp"
#include "oracles.hpp"

using namespace kerrparamp;

namespace {

double mhz(double v) { return units::mhz_to_angular(v); }

double n_a_at(double dbm, const ModeParams& p) {
  return units::signal_strength_from_dbm(dbm, p.omega_a, p.kappa_a);
}

// 20 dB small-signal bias at eps, without the analysis module
std::pair<PumpBias, double> bias_20db(double eps, const ModeParams& p) {
  double lo = 0.0, hi = critical_pump_photons(eps, p, 8 * p.K.ac, 8 * p.K.bc) * (1 - 1e-9);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (peak_gain_detuning_4(eps, {eps, mid}, p).gain < 100.0 ? lo : hi) = mid;
  }
  const PumpBias b{eps, 0.5 * (lo + hi)};
  return {b, peak_gain_detuning_4(eps, b, p).numeric};
}

}  // namespace

TEST_CASE("small-signal gain reduces to the third-order form") {
  ModeParams p = fixtures::device();
  ModeParams q = with_kerr_scale(p, 0.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> det(-mhz(30), mhz(30));
  for (int i = 0; i < 100; ++i) {
    const double d = det(rng), e = det(rng);
    const PumpBias b{e, 5.0};
    CHECK(small_signal_gain_4(d, e, b, q) == doctest::Approx(reflection_gain_3(d, e, b, q)).epsilon(1e-15));
    CHECK(small_signal_gain_4(d, e, {e, 0.0}, p) == doctest::Approx(1.0));
  }
  // equal cross-Kerr: a pure shift of the signal and pump detunings
  p.K.ac = p.K.bc = mhz(0.05);
  for (int i = 0; i < 50; ++i) {
    const double d = det(rng), e = det(rng);
    const PumpBias b{e, 5.0};
    const double k = 8 * p.K.ac * b.n_p;
    CHECK(small_signal_gain_4(d, e, b, p) ==
          doctest::Approx(reflection_gain_3(d + k, e + 2 * k, {e + 2 * k, 5.0}, p)).epsilon(1e-12));
  }
}

TEST_CASE("fourth-order peak detuning special cases") {
  ModeParams p = fixtures::device();
  p.kappa_b = p.kappa_a;
  SUBCASE("equal cross-Kerr, equal linewidths") {
    p.K.ac = p.K.bc = mhz(0.02);
    for (double n : {1.0, 5.0, 9.0}) {
      const PeakDetuning pk = peak_gain_detuning_4(mhz(1.5), {mhz(1.5), n}, p);
      CHECK(pk.analytic == doctest::Approx(mhz(0.75)).epsilon(1e-12));
      CHECK(pk.numeric == doctest::Approx(mhz(0.75)).epsilon(1e-9));
    }
  }
  SUBCASE("unequal cross-Kerr at zero pump detuning") {
    p.K.ac = mhz(0.01);
    p.K.bc = mhz(0.03);
    const double n = 6.0;
    const PeakDetuning pk = peak_gain_detuning_4(0.0, {0.0, n}, p);
    CHECK(pk.analytic == doctest::Approx(4 * (p.K.bc - p.K.ac) * n).epsilon(1e-12));
    CHECK(pk.numeric == doctest::Approx(4 * (p.K.bc - p.K.ac) * n).epsilon(1e-9));
  }
}

TEST_CASE("zero signal reproduces the small-signal gain") {
  const ModeParams& p = fixtures::device();
  for (double e : {-5.0, -2.0, 0.0, 2.0, 7.5}) {
    const auto [b, d] = bias_20db(mhz(e), p);
    const DriveResponse r = solve_kerr_response(d, b.epsilon, b, 0.0, p);
    CHECK(r.converged());
    CHECK(r.gain() == doctest::Approx(small_signal_gain_4(d, b.epsilon, b, p)).epsilon(1e-9));
    CHECK(r.gain() == doctest::Approx(100.0).epsilon(1e-8));
  }
}

TEST_CASE("no Kerr terms means no saturation") {
  const ModeParams p = with_kerr_scale(fixtures::device(), 0.0);
  const auto [b, d] = bias_20db(mhz(-2.0), p);
  for (double dbm : {-140.0, -110.0, -80.0, -50.0}) {
    const DriveResponse r = solve_kerr_response(d, b.epsilon, b, n_a_at(dbm, p), p);
    CHECK(r.gain() == doctest::Approx(reflection_gain_3(d, b.epsilon, b, p)).epsilon(1e-10));
  }
}

TEST_CASE("converged responses satisfy the Langevin pair") {
  const ModeParams& p = fixtures::device();
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> eps(-10, 10), dbm(-140, -95);
  for (int i = 0; i < 40; ++i) {
    const auto [b, d] = bias_20db(mhz(eps(rng)), p);
    const double n = n_a_at(dbm(rng), p);
    const DriveResponse r = solve_kerr_response(d, b.epsilon, b, n, p);
    REQUIRE(r.converged());
    CHECK(r.residual < 1e-10);
    CHECK(langevin4_residual(d, b.epsilon, b, n, p, {r.alpha, r.beta}) < 1e-10);
  }
}

TEST_CASE("solver root agrees with the grid oracle") {
  const ModeParams& p = fixtures::device();
  for (double e : {-4.0, 0.0, 3.0}) {
    const auto [b, d] = bias_20db(mhz(e), p);
    const double n = n_a_at(-112.0, p);
    const DriveResponse r = solve_kerr_response(d, b.epsilon, b, n, p);
    const ShiftPair s = stark_shifts(b, p);
    const double k = p.kappa_mean();
    const oracle::Box box{s.a - 0.5 * k, s.a + 2 * k, s.b - 0.5 * k, s.b + 4 * k};
    const oracle::RootScan scan =
        oracle::enumerate_fixed_points(d, b.epsilon, b, n, p, box, k * 1e-4, 128);
    REQUIRE(scan.roots.size() == 1);
    CHECK(std::abs(scan.roots[0].a - r.delta_a) < 1e-9 * k);
    CHECK(std::abs(scan.roots[0].b - r.delta_b) < 1e-9 * k);
  }
}

TEST_CASE("bistable sweep lands on the oracle's outer roots") {
  const ModeParams& p = fixtures::device();
  const double eps = mhz(-60.0);
  const auto [b, d] = bias_20db(eps, p);
  std::vector<double> grid;
  for (double dbm = -92.0; dbm <= -85.0 + 1e-9; dbm += 0.5) grid.push_back(n_a_at(dbm, p));
  const SignalSweep sw = sweep_signal_power(d, eps, b, grid, SweepDirection::both, p);
  REQUIRE(sw.hysteresis);
  CHECK(sw.folds_up.size() == 1);
  CHECK(sw.folds_down.size() == 1);
  const double k = p.kappa_mean();
  int bistable = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(sw.up[i].converged());
    REQUIRE(sw.down[i].converged());
    const oracle::RootScan scan = oracle::enumerate_fixed_points(
        d, eps, b, grid[i], p, {-10 * k, 10 * k, -10 * k, 10 * k}, 1e-3 * k);
    const bool inside = grid[i] >= sw.hysteresis->first && grid[i] <= sw.hysteresis->second;
    CHECK(scan.roots.size() == (inside ? 3u : 1u));
    if (inside) ++bistable;
    // both sweeps sit on oracle roots; inside the window they differ
    for (const DriveResponse* r : {&sw.up[i], &sw.down[i]}) {
      double best = INFINITY;
      for (const ShiftPair& q : scan.roots)
        best = std::min(best, std::hypot(q.a - r->delta_a, q.b - r->delta_b));
      CHECK(best < 1e-9 * k);
    }
    CHECK((sw.up[i].branch != sw.down[i].branch) == inside);
  }
  CHECK(bistable >= 3);
}

TEST_CASE("saturation direction depends on the pump detuning sign") {
  const ModeParams& p = fixtures::device();
  std::vector<double> grid;
  for (double dbm = -140; dbm <= -100; dbm += 0.5) grid.push_back(n_a_at(dbm, p));

  const auto [bp, dp] = bias_20db(mhz(2.0), p);
  const SignalSweep plus = sweep_signal_power(dp, bp.epsilon, bp, grid, SweepDirection::up, p);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(plus.up[i].gain() < plus.up[i - 1].gain());

  const auto [bm, dm] = bias_20db(mhz(-2.0), p);
  const SignalSweep minus = sweep_signal_power(dm, bm.epsilon, bm, grid, SweepDirection::up, p);
  double peak = 0.0;
  for (const auto& r : minus.up) peak = std::max(peak, r.gain());
  CHECK(peak > minus.up.front().gain() * (1 + 1e-4));
  CHECK(minus.up.back().gain() < minus.up.front().gain());
}

TEST_CASE("up and down sweeps agree away from folds") {
  const ModeParams& p = fixtures::device();
  std::vector<double> grid;
  for (double dbm = -140; dbm <= -95; dbm += 1.0) grid.push_back(n_a_at(dbm, p));
  const auto [b, d] = bias_20db(mhz(-1.0), p);
  const SignalSweep s = sweep_signal_power(d, b.epsilon, b, grid, SweepDirection::both, p);
  CHECK(s.folds_up.empty());
  CHECK(s.folds_down.empty());
  CHECK_FALSE(s.hysteresis.has_value());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(s.up[i].gain() == doctest::Approx(s.down[i].gain()).epsilon(1e-9));
}

TEST_CASE("sweep grid validation") {
  const ModeParams& p = fixtures::device();
  CHECK_THROWS_AS(sweep_signal_power(0, 0, {0, 1}, {1.0, 1.0}, SweepDirection::up, p), std::invalid_argument);
  CHECK_THROWS_AS(sweep_signal_power(0, 0, {0, 1}, {1.0}, SweepDirection::up, p), std::invalid_argument);
  CHECK_THROWS_AS(solve_kerr_response(0, 0, {0, 1}, -1.0, p), std::invalid_argument);
}
