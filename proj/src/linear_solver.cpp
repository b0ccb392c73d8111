#include "kerrparamp/linear_solver.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kerrparamp/errors.hpp"
#include "kerrparamp/peak_search.hpp"

namespace kerrparamp {

namespace {
constexpr double kCriticalRatio = 1e-12;
using cplx = std::complex<double>;
}  // namespace

Scattering scattering_at(double det_a, double det_b, double g, double n_p, double kappa_a,
                         double kappa_b) {
  const cplx A(kappa_a / 2.0, -det_a);
  const cplx Bc(kappa_b / 2.0, det_b);  // conj(kappa_b/2 - i det_b)
  const double G = g * std::sqrt(n_p);
  const cplx den = A * Bc - G * G;
  if (std::abs(den) < kCriticalRatio * std::max(std::abs(A * Bc), G * G))
    throw CriticalPoint("Langevin system is singular at this operating point");
  const cplx one_plus_alpha = kappa_a * Bc / den;
  const cplx beta = cplx(0.0, 1.0) * G * std::sqrt(kappa_b) * one_plus_alpha /
                    (std::sqrt(kappa_a) * Bc);
  return {one_plus_alpha - 1.0, beta};
}

GainPolynomial gain_polynomial(double det_a, double det_b, double g2n, double kappa_a,
                               double kappa_b) {
  const double t4 = 16.0 * g2n * g2n;
  const double cross = -4.0 * det_a * det_b;
  const double kk = kappa_a * kappa_b;
  const double tail = (4.0 * det_a * det_a + kappa_a * kappa_a) *
                      (4.0 * det_b * det_b + kappa_b * kappa_b);
  GainPolynomial p;
  p.numerator = t4 + 8.0 * g2n * (cross + kk) + tail;
  p.denominator = t4 + 8.0 * g2n * (cross - kk) + tail;
  p.scale = std::max({t4, std::abs(8.0 * g2n * cross), 8.0 * g2n * kk, tail});
  return p;
}

double gain_denominator_slope(double det_a, double det_b, double g2n, double kappa_a,
                              double kappa_b) {
  return -32.0 * g2n * (det_b - det_a) +
         8.0 * det_a * (4.0 * det_b * det_b + kappa_b * kappa_b) -
         8.0 * det_b * (4.0 * det_a * det_a + kappa_a * kappa_a);
}

double gain_from_detunings(double det_a, double det_b, double g2n, double kappa_a,
                           double kappa_b) {
  const GainPolynomial p = gain_polynomial(det_a, det_b, g2n, kappa_a, kappa_b);
  if (!(p.denominator > kCriticalRatio * p.scale))
    throw CriticalPoint("reflection gain diverges at this operating point");
  // numerator - denominator is exactly 16 g^2 n_p kappa_a kappa_b
  return 1.0 + 16.0 * g2n * kappa_a * kappa_b / p.denominator;
}

double reflection_gain_3(double delta, double epsilon, const PumpBias& bias,
                         const ModeParams& params) {
  return gain_from_detunings(delta, -delta + epsilon, params.g * params.g * bias.n_p,
                             params.kappa_a, params.kappa_b);
}

Scattering linear_response_3(double delta, double epsilon, const PumpBias& bias,
                             const ModeParams& params) {
  return scattering_at(delta, -delta + epsilon, params.g, bias.n_p, params.kappa_a,
                       params.kappa_b);
}

double langevin3_residual(double delta, double epsilon, const PumpBias& bias,
                          const ModeParams& params, const Scattering& s) {
  const double ka = params.kappa_a;
  const double kb = params.kappa_b;
  const double G = params.g * std::sqrt(bias.n_p);
  const cplx i(0.0, 1.0);
  const cplx opa = 1.0 + s.alpha;
  const cplx eq_a = (ka / 2.0 - i * delta) * opa / std::sqrt(ka) + i * G / std::sqrt(kb) * s.beta -
                    std::sqrt(ka);
  const cplx eq_b = (kb / 2.0 - i * (-delta + epsilon)) * std::conj(s.beta) / std::sqrt(kb) +
                    i * G / std::sqrt(ka) * std::conj(opa);
  return std::max(std::abs(eq_a), std::abs(eq_b)) / std::sqrt(ka);
}

std::pair<double, double> maximize_gain(double epsilon, double shift_a, double shift_b,
                                        double g2n, double kappa_a, double kappa_b) {
  const double kappa = 0.5 * (kappa_a + kappa_b);
  // signal detuning at which both effective detunings sit at the same
  // fraction of their linewidths
  const double center = (kappa_a * (epsilon + shift_b) - kappa_b * shift_a) / (kappa_a + kappa_b);
  auto denom = [&](double d) {
    return gain_polynomial(d + shift_a, epsilon - d + shift_b, g2n, kappa_a, kappa_b).denominator;
  };
  // maximum gain is the minimum of the denominator
  const int samples = 401;
  const double lo = center - 2.0 * kappa;
  const double hi = center + 2.0 * kappa;
  const Maximum m = golden_section_maximize([&](double d) { return -denom(d); }, lo, hi, samples);

  double x = m.x;
  auto slope = [&](double d) {
    return gain_denominator_slope(d + shift_a, epsilon - d + shift_b, g2n, kappa_a, kappa_b);
  };
  const double dx = (hi - lo) / (samples - 1);
  const double left = x - dx;
  const double right = x + dx;
  if (slope(left) < 0.0 && slope(right) > 0.0) x = bracketed_root(slope, left, right);
  return {x, gain_from_detunings(x + shift_a, epsilon - x + shift_b, g2n, kappa_a, kappa_b)};
}

double peak_gain_detuning_3_analytic(double epsilon, const PumpBias& bias,
                                     const ModeParams& params) {
  const double kappa = params.kappa_mean();
  const double half_dk = 0.5 * (params.kappa_b - params.kappa_a);
  const double x = 4.0 * params.g * params.g * bias.n_p + kappa * kappa + half_dk * half_dk;
  return (0.5 - kappa * half_dk / x) * epsilon;
}

PeakDetuning peak_gain_detuning_3(double epsilon, const PumpBias& bias,
                                  const ModeParams& params) {
  PeakDetuning out;
  out.analytic = peak_gain_detuning_3_analytic(epsilon, bias, params);
  const auto [x, gain] = maximize_gain(epsilon, 0.0, 0.0, params.g * params.g * bias.n_p,
                                       params.kappa_a, params.kappa_b);
  out.numeric = x;
  out.gain = gain;
  return out;
}

double critical_pump_photons(double epsilon, const ModeParams& params, double stark_a,
                             double stark_b) {
  const double ka = params.kappa_a;
  const double kb = params.kappa_b;
  const double g2 = params.g * params.g;
  const double q = 4.0 * ka * kb / ((ka + kb) * (ka + kb));
  const double S = stark_a + stark_b;
  const double inf = std::numeric_limits<double>::infinity();
  // q S^2 n^2 + (2 q eps S - 4 g^2) n + (ka kb + q eps^2) = 0
  const double a = q * S * S;
  const double b = 2.0 * q * epsilon * S - 4.0 * g2;
  const double c = ka * kb + q * epsilon * epsilon;
  if (a == 0.0) {
    if (b >= 0.0) return inf;
    return -c / b;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0 || b >= 0.0) return inf;  // c > 0, so both roots share the sign of -b
  // smaller positive root, cancellation-free
  const double qq = -0.5 * (b - std::sqrt(disc));
  return c / qq;
}

double gain_power_law(double ratio) {
  if (!(ratio >= 0.0) || !(ratio < 1.0))
    throw std::invalid_argument("pump ratio must lie in [0, 1)");
  const double g = (1.0 + ratio) / (1.0 - ratio);
  return g * g;
}

double fit_critical_power(const std::vector<std::pair<double, double>>& samples,
                          double max_rms_log_gain) {
  if (samples.size() < 3) throw std::invalid_argument("need at least 3 samples");
  double p_max = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto [p, g] = samples[i];
    if (!(p > 0.0) || !(g >= 1.0)) throw std::invalid_argument("samples need P > 0, G >= 1");
    if (i > 0 && !(p > samples[i - 1].first && g >= samples[i - 1].second))
      throw std::invalid_argument("samples must be monotone in P and G");
    p_max = std::max(p_max, p);
  }
  auto cost = [&](double log_pc) {
    const double pc = std::exp(log_pc);
    double sum = 0.0;
    for (const auto& [p, g] : samples) {
      const double r = p / pc;
      const double model = 2.0 * std::log((1.0 + r) / (1.0 - r));
      const double d = std::log(g) - model;
      sum += d * d;
    }
    return sum;
  };
  const double lo = std::log(p_max) + 1e-12;
  const double hi = std::log(p_max) + std::log(1e3);
  const auto [log_pc, sum] = boost::math::tools::brent_find_minima(cost, lo, hi, 50);
  const double rms = std::sqrt(sum / static_cast<double>(samples.size()));
  if (rms > max_rms_log_gain) throw FitDiverged("critical power fit residual too large");
  return std::exp(log_pc);
}

}  // namespace kerrparamp
