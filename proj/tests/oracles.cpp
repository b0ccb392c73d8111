#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

namespace oracle {

using cplx = std::complex<double>;

Scattering langevin_direct(double det_a, double det_b, double g, double n_p, double kappa_a,
                           double kappa_b) {
  // unknowns u = 1 + alpha, w = beta; the idler equation is conjugated
  const cplx i(0.0, 1.0);
  const double G = g * std::sqrt(n_p);
  Eigen::Matrix2cd M;
  M << (kappa_a / 2.0 - i * det_a) / std::sqrt(kappa_a), i * G / std::sqrt(kappa_b),
      -i * G / std::sqrt(kappa_a), (kappa_b / 2.0 + i * det_b) / std::sqrt(kappa_b);
  Eigen::Vector2cd rhs(std::sqrt(kappa_a), 0.0);
  const Eigen::Vector2cd x = M.fullPivLu().solve(rhs);
  return {x(0) - 1.0, x(1)};
}

ShiftPair residual_direct(double delta, double epsilon, const PumpBias& bias, double n_a,
                          const ModeParams& p, const ShiftPair& d) {
  const Scattering s = langevin_direct(delta + d.a, -delta + epsilon + d.b, p.g, bias.n_p,
                                       p.kappa_a, p.kappa_b);
  const double X = std::norm(1.0 + s.alpha) * n_a;
  const double Y = p.kappa_a / p.kappa_b * std::norm(s.beta) * n_a;
  const double ta = p.K.aa * X + 2.0 * p.K.ab * Y + 8.0 * p.K.ac * bias.n_p;
  const double tb = p.K.bb * Y + 2.0 * p.K.ab * X + 8.0 * p.K.bc * bias.n_p;
  return {ta - d.a, tb - d.b};
}

namespace {

struct Cell {
  long i, j;  // integer coordinates at the current level
};

}  // namespace

RootScan enumerate_fixed_points(double delta, double epsilon, const PumpBias& bias, double n_a,
                                const ModeParams& params, const Box& box, double resolution,
                                int initial) {
  RootScan out;
  const std::size_t budget = 4'000'000;
  double wa = (box.a_hi - box.a_lo) / initial;
  double wb = (box.b_hi - box.b_lo) / initial;

  auto F = [&](double a, double b) {
    return residual_direct(delta, epsilon, bias, n_a, params, {a, b});
  };
  auto sign_change = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo <= 0.0 && *hi >= 0.0;
  };
  auto keep = [&](const Cell& c) {
    const double a0 = box.a_lo + c.i * wa;
    const double b0 = box.b_lo + c.j * wb;
    std::vector<double> fa, fb;
    for (double ta : {0.0, 0.5, 1.0})
      for (double tb : {0.0, 0.5, 1.0}) {
        const ShiftPair r = F(a0 + ta * wa, b0 + tb * wb);
        fa.push_back(r.a);
        fb.push_back(r.b);
      }
    return sign_change(fa) && sign_change(fb);
  };

  std::vector<Cell> cells;
  for (long i = 0; i < initial; ++i)
    for (long j = 0; j < initial; ++j)
      if (keep({i, j})) cells.push_back({i, j});

  while (std::max(wa, wb) > resolution && !cells.empty()) {
    wa *= 0.5;
    wb *= 0.5;
    std::vector<Cell> next;
    for (const Cell& c : cells)
      for (long di : {0, 1})
        for (long dj : {0, 1}) {
          const Cell k{2 * c.i + di, 2 * c.j + dj};
          if (keep(k)) next.push_back(k);
        }
    cells.swap(next);
    if (cells.size() > budget) {
      out.truncated = true;
      break;
    }
  }
  out.cells = cells.size();

  // sign changes alone pass cells where the two nullclines run close
  // together, so every survivor is polished and only true roots are kept
  const double scale = std::max({box.a_hi - box.a_lo, box.b_hi - box.b_lo, 1.0});
  auto norm = [](const ShiftPair& r) { return std::hypot(r.a, r.b); };
  for (const Cell& c : cells) {
    Eigen::Vector2d x(box.a_lo + (c.i + 0.5) * wa, box.b_lo + (c.j + 0.5) * wb);
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const ShiftPair r = F(x(0), x(1));
      if (norm(r) < 1e-12 * scale) {
        ok = true;
        break;
      }
      const double h = 1e-7 * scale;
      Eigen::Matrix2d J;
      for (int k = 0; k < 2; ++k) {
        Eigen::Vector2d xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        const ShiftPair fp = F(xp(0), xp(1)), fm = F(xm(0), xm(1));
        J(0, k) = (fp.a - fm.a) / (2.0 * h);
        J(1, k) = (fp.b - fm.b) / (2.0 * h);
      }
      const Eigen::Vector2d step = J.fullPivLu().solve(Eigen::Vector2d(r.a, r.b));
      if (!step.allFinite()) break;
      x -= step;
    }
    if (!ok) continue;
    // a polished root must stay near the cell that produced it
    if (std::abs(x(0) - (box.a_lo + (c.i + 0.5) * wa)) > 4.0 * wa ||
        std::abs(x(1) - (box.b_lo + (c.j + 0.5) * wb)) > 4.0 * wb)
      continue;
    const ShiftPair root{x(0), x(1)};
    const bool seen = std::any_of(out.roots.begin(), out.roots.end(), [&](const ShiftPair& q) {
      return std::hypot(q.a - root.a, q.b - root.b) < 1e-6 * scale;
    });
    if (!seen) out.roots.push_back(root);
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const ShiftPair& l, const ShiftPair& r) { return l.a < r.a; });
  return out;
}

std::vector<std::pair<double, double>> power_law_samples(double p_c, double relative_noise,
                                                         int count, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, relative_noise);
  std::vector<std::pair<double, double>> out;
  double last = 1.0;
  for (int k = 1; k <= count; ++k) {
    const double p = p_c * 0.9 * k / count;
    const double r = p / p_c;
    const double g = std::pow((1.0 + r) / (1.0 - r), 2) * (1.0 + noise(rng));
    last = std::max(last, g);  // keep the sample list monotone
    out.emplace_back(p, last);
  }
  return out;
}

}  // namespace oracle
