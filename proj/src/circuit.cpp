#include "kerrparamp/circuit.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "kerrparamp/errors.hpp"
#include "kerrparamp/units.hpp"

namespace kerrparamp {

namespace {

constexpr double kSingularityWindow = 1e-6;  // rad

void check_spec(const CircuitSpec& s) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(s.E_J, "E_J");
  positive(s.L_a, "L_a");
  positive(s.L_b, "L_b");
  positive(s.L_c, "L_c");
  positive(s.C_a, "C_a");
  positive(s.C_b, "C_b");
  positive(s.C_c, "C_c");
  positive(s.kappa_a, "kappa_a");
  positive(s.kappa_b, "kappa_b");
  if (!std::isfinite(s.flux)) throw std::invalid_argument("flux must be finite");

  // distance of the bias phase to the nearest pi/2 + k pi
  const double phase = units::bias_phase(s.flux);
  const double shifted = phase - units::pi / 2.0;
  const double dist = std::abs(shifted - units::pi * std::round(shifted / units::pi));
  if (dist < kSingularityWindow)
    throw FluxSingularity("cos(Phi_ext/4phi0) vanishes: Josephson inductance diverges");
}

struct Mode {
  double p, omega, Z;
};

Mode embed(double L, double C, double L_J) {
  const double L_total = L + L_J;
  if (!(L_total > 0.0))
    throw NonPhysical("mode inductance L + L_J is not positive; frequency is imaginary");
  const double omega = 1.0 / std::sqrt(L_total * C);
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw NonPhysical("derived mode frequency is not positive");
  return {L_J / L_total, omega, std::sqrt(L_total / C)};
}

void dress(ModeParams& m) {
  const KerrMatrix& K = m.K;
  m.dressed_a = m.omega_a - 0.5 * K.aa - K.ab - 4.0 * K.ac;
  m.dressed_b = m.omega_b - 0.5 * K.bb - K.ab - 4.0 * K.bc;
  m.dressed_c = m.omega_c - 8.0 * K.cc - 4.0 * K.ac - 4.0 * K.bc;
  if (!(m.dressed_a > 0.0) || !(m.dressed_b > 0.0) || !(m.dressed_c > 0.0))
    throw NonPhysical("dressed mode frequency is not positive");
}

}  // namespace

KerrMatrix KerrMatrix::scaled(double factor) const {
  return {aa * factor, bb * factor, cc * factor, ab * factor, ac * factor, bc * factor};
}

ModeParams derive_mode_params(const CircuitSpec& spec) {
  check_spec(spec);
  using units::hbar;
  using units::phi0;

  const double phase = units::bias_phase(spec.flux);
  const double c = std::cos(phase);
  const double s = std::sin(phase);

  ModeParams m;
  m.L_J = phi0 * phi0 / (spec.E_J * c);
  const Mode a = embed(spec.L_a, spec.C_a, m.L_J);
  const Mode b = embed(spec.L_b, spec.C_b, m.L_J);
  const Mode cm = embed(spec.L_c, spec.C_c, m.L_J);

  m.omega_a = a.omega;
  m.omega_b = b.omega;
  m.omega_c = cm.omega;
  m.p_a = a.p;
  m.p_b = b.p;
  m.p_c = cm.p;
  m.Z_a = a.Z;
  m.Z_b = b.Z;
  m.Z_c = cm.Z;
  m.kappa_a = spec.kappa_a;
  m.kappa_b = spec.kappa_b;

  const double phi0_3 = phi0 * phi0 * phi0;
  m.g = -a.p * b.p * cm.p * spec.E_J * std::sqrt(hbar) * s /
        (2.0 * std::sqrt(2.0) * phi0_3) * std::sqrt(a.Z * b.Z * cm.Z);

  // K_ii = hbar E_J cos p^4 (L'/C) / 32 phi0^4, with L'/C = Z^2
  const double pref = hbar * spec.E_J * c / (32.0 * phi0_3 * phi0);
  auto self = [&](const Mode& md) { return pref * std::pow(md.p, 4) * md.Z * md.Z; };
  m.K.aa = self(a);
  m.K.bb = self(b);
  m.K.cc = self(cm);
  // shared sign, so the geometric mean keeps it
  const double sign = c >= 0.0 ? 1.0 : -1.0;
  m.K.ab = sign * std::sqrt(m.K.aa * m.K.bb);
  m.K.ac = sign * std::sqrt(m.K.aa * m.K.cc);
  m.K.bc = sign * std::sqrt(m.K.bb * m.K.cc);

  dress(m);
  return m;
}

ModeParams with_kerr_scale(const ModeParams& params, double factor) {
  ModeParams m = params;
  m.K = params.K.scaled(factor);
  dress(m);
  return m;
}

double exact_jrm_energy(double flux_a, double flux_b, double flux_c, double flux_ext,
                        double E_J) {
  using units::phi0;
  const double phase = units::bias_phase(flux_ext);
  const double ha = flux_a / (2.0 * phi0);
  const double hb = flux_b / (2.0 * phi0);
  const double hc = flux_c / phi0;
  return -4.0 * E_J *
         (std::cos(phase) * std::cos(ha) * std::cos(hb) * std::cos(hc) +
          std::sin(phase) * std::sin(ha) * std::sin(hb) * std::sin(hc));
}

namespace {

constexpr double kBaseStep = 0.1;       // in units of phi0
constexpr double kAgreement = 1e-4;

using Reduced = std::function<double(double, double, double)>;
using Stencil = std::function<double(const Reduced&, double)>;

// Richardson table over h, h/2, h/4 for an O(h^2) stencil.
double richardson(const Reduced& f, const Stencil& stencil, const char* what) {
  const double d0 = stencil(f, kBaseStep);
  const double d1 = stencil(f, kBaseStep / 2.0);
  const double d2 = stencil(f, kBaseStep / 4.0);
  const double r0 = (4.0 * d1 - d0) / 3.0;
  const double r1 = (4.0 * d2 - d1) / 3.0;
  const double best = (16.0 * r1 - r0) / 15.0;
  const double scale = std::max(std::abs(best), 1e-8);
  if (std::abs(r1 - r0) > kAgreement * scale)
    throw StepSizeFailure(std::string("Richardson estimates disagree for ") + what);
  return best;
}

double second(const Reduced& f, int axis, double h) {
  double e[3] = {0, 0, 0};
  e[axis] = h;
  return (f(e[0], e[1], e[2]) - 2.0 * f(0, 0, 0) + f(-e[0], -e[1], -e[2])) / (h * h);
}

double fourth(const Reduced& f, int axis, double h) {
  auto at = [&](double t) {
    double e[3] = {0, 0, 0};
    e[axis] = t;
    return f(e[0], e[1], e[2]);
  };
  return (at(2 * h) - 4.0 * at(h) + 6.0 * at(0) - 4.0 * at(-h) + at(-2 * h)) / std::pow(h, 4);
}

// d4/di^2 dj^2
double mixed22(const Reduced& f, int i, int j, double h) {
  auto at = [&](double si, double sj) {
    double e[3] = {0, 0, 0};
    e[i] = si;
    e[j] = sj;
    return f(e[0], e[1], e[2]);
  };
  const double corners = at(h, h) + at(h, -h) + at(-h, h) + at(-h, -h);
  const double edges = at(h, 0) + at(-h, 0) + at(0, h) + at(0, -h);
  return (corners - 2.0 * edges + 4.0 * at(0, 0)) / std::pow(h, 4);
}

double mixed111(const Reduced& f, double h) {
  double sum = 0.0;
  for (int sa : {-1, 1})
    for (int sb : {-1, 1})
      for (int sc : {-1, 1}) sum += sa * sb * sc * f(sa * h, sb * h, sc * h);
  return sum / (8.0 * h * h * h);
}

}  // namespace

OracleCoefficients expansion_oracle(const CircuitSpec& spec, int order) {
  if (order < 2 || order > 4) throw std::invalid_argument("oracle order must be 2, 3 or 4");
  check_spec(spec);
  using units::hbar;
  using units::phi0;

  // energy in units of E_J, fluxes in units of phi0
  const Reduced f = [&](double xa, double xb, double xc) {
    return exact_jrm_energy(xa * phi0, xb * phi0, xc * phi0, spec.flux, 1.0);
  };

  OracleCoefficients out;
  out.order = order;
  const double EJ = spec.E_J;

  if (order == 2) {
    for (int i = 0; i < 3; ++i) {
      const double d2 = richardson(
          f, [i](const Reduced& fn, double h) { return second(fn, i, h); }, "quadratic");
      out.quadratic[i] = 0.5 * EJ * d2 / (phi0 * phi0);
    }
    return out;
  }

  // Zero-point flux amplitude across the ring for each mode.
  const double c = std::cos(units::bias_phase(spec.flux));
  const double L_J = phi0 * phi0 / (EJ * c);
  auto amplitude = [&](double L, double C) {
    const double L_total = L + L_J;
    if (!(L_total > 0.0)) throw NonPhysical("mode inductance L + L_J is not positive");
    const double Z = std::sqrt(L_total / C);
    return (L_J / L_total) * std::sqrt(hbar * Z / 2.0);
  };
  const double Aa = amplitude(spec.L_a, spec.C_a);
  const double Ab = amplitude(spec.L_b, spec.C_b);
  const double Ac = amplitude(spec.L_c, spec.C_c);

  if (order == 3) {
    const double d3 = richardson(
        f, [](const Reduced& fn, double h) { return mixed111(fn, h); }, "cubic");
    out.cubic = EJ * d3 / (phi0 * phi0 * phi0);
    out.g = out.cubic * Aa * Ab * Ac / hbar;
    return out;
  }

  const double unit4 = EJ / std::pow(phi0, 4);
  auto quartic = [&](int axis) {
    return unit4 * richardson(
                       f, [axis](const Reduced& fn, double h) { return fourth(fn, axis, h); },
                       "quartic");
  };
  auto cross = [&](int i, int j) {
    return unit4 * richardson(
                       f, [i, j](const Reduced& fn, double h) { return mixed22(fn, i, j, h); },
                       "quartic cross");
  };

  // Normal-ordered coefficients matching the Kerr Hamiltonian prefactors
  // (1/2 on aa, bb; 2 on ab; 8 on ac, bc, cc).
  out.K.aa = -quartic(0) * std::pow(Aa, 4) / (2.0 * hbar);
  out.K.bb = -quartic(1) * std::pow(Ab, 4) / (2.0 * hbar);
  out.K.cc = -quartic(2) * std::pow(Ac, 4) / (32.0 * hbar);
  out.K.ab = -cross(0, 1) * Aa * Aa * Ab * Ab / (2.0 * hbar);
  out.K.ac = -cross(0, 2) * Aa * Aa * Ac * Ac / (8.0 * hbar);
  out.K.bc = -cross(1, 2) * Ab * Ab * Ac * Ac / (8.0 * hbar);
  return out;
}

}  // namespace kerrparamp
