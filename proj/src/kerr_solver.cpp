#include "kerrparamp/kerr_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kerrparamp/errors.hpp"

namespace kerrparamp {

const char* to_string(Branch b) {
  switch (b) {
    case Branch::lower: return "lower";
    case Branch::upper: return "upper";
    case Branch::not_converged: return "not_converged";
  }
  return "unknown";
}

ShiftPair stark_shifts(const PumpBias& bias, const ModeParams& params) {
  return {8.0 * params.K.ac * bias.n_p, 8.0 * params.K.bc * bias.n_p};
}

double small_signal_gain_4(double delta, double epsilon, const PumpBias& bias,
                           const ModeParams& params) {
  const ShiftPair s = stark_shifts(bias, params);
  return gain_from_detunings(delta + s.a, -delta + epsilon + s.b,
                             params.g * params.g * bias.n_p, params.kappa_a, params.kappa_b);
}

double peak_gain_detuning_4_analytic(double epsilon, const PumpBias& bias,
                                     const ModeParams& params) {
  const ShiftPair s = stark_shifts(bias, params);
  const double S = s.a + s.b;
  const double kappa = params.kappa_mean();
  const double dk = params.kappa_b - params.kappa_a;
  const double base = 4.0 * params.g * params.g * bias.n_p + kappa * kappa;
  const double x_minus = base - S * S;
  const double x_plus = base + S * S;
  return 0.5 * (s.b - s.a) - kappa * dk * S / (2.0 * x_minus) +
         (0.5 - kappa * dk * x_plus / (2.0 * x_minus * x_minus)) * epsilon;
}

PeakDetuning peak_gain_detuning_4(double epsilon, const PumpBias& bias,
                                  const ModeParams& params) {
  const ShiftPair s = stark_shifts(bias, params);
  PeakDetuning out;
  out.analytic = peak_gain_detuning_4_analytic(epsilon, bias, params);
  const auto [x, gain] = maximize_gain(epsilon, s.a, s.b, params.g * params.g * bias.n_p,
                                       params.kappa_a, params.kappa_b);
  out.numeric = x;
  out.gain = gain;
  return out;
}

ShiftPair kerr_shifts(const Scattering& s, const PumpBias& bias, double n_a,
                      const ModeParams& params) {
  const KerrMatrix& K = params.K;
  const double ratio = params.kappa_a / params.kappa_b;
  const double signal = std::norm(1.0 + s.alpha) * n_a;  // intracavity a photons
  const double idler = ratio * std::norm(s.beta) * n_a;  // intracavity b photons
  const ShiftPair stark = stark_shifts(bias, params);
  return {K.aa * signal + 2.0 * K.ab * idler + stark.a,
          K.bb * idler + 2.0 * K.ab * signal + stark.b};
}

Scattering response_at_shifts(double delta, double epsilon, const PumpBias& bias,
                              const ModeParams& params, const ShiftPair& shifts) {
  return scattering_at(delta + shifts.a, -delta + epsilon + shifts.b, params.g, bias.n_p,
                       params.kappa_a, params.kappa_b);
}

ShiftPair shift_residual(double delta, double epsilon, const PumpBias& bias, double n_a,
                         const ModeParams& params, const ShiftPair& d) {
  const ShiftPair t =
      kerr_shifts(response_at_shifts(delta, epsilon, bias, params, d), bias, n_a, params);
  return {t.a - d.a, t.b - d.b};
}

double langevin4_residual(double delta, double epsilon, const PumpBias& bias, double n_a,
                          const ModeParams& params, const Scattering& s) {
  const ShiftPair d = kerr_shifts(s, bias, n_a, params);
  const double ka = params.kappa_a;
  const double kb = params.kappa_b;
  const double G = params.g * std::sqrt(bias.n_p);
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> opa = 1.0 + s.alpha;
  const auto eq_a = (ka / 2.0 - i * (delta + d.a)) * opa / std::sqrt(ka) +
                    i * G / std::sqrt(kb) * s.beta - std::sqrt(ka);
  const auto eq_b = (kb / 2.0 - i * (-delta + epsilon + d.b)) * std::conj(s.beta) / std::sqrt(kb) +
                    i * G / std::sqrt(ka) * std::conj(opa);
  return std::max(std::abs(eq_a), std::abs(eq_b)) / std::sqrt(ka);
}

namespace {

double inf_norm(const ShiftPair& p) { return std::max(std::abs(p.a), std::abs(p.b)); }

}  // namespace

DriveResponse newton_kerr(double delta, double epsilon, const PumpBias& bias, double n_a,
                          const ModeParams& params, const ContinuationPolicy& policy,
                          const ShiftPair& seed) {
  DriveResponse out;
  const double scale = std::max(params.kappa_a, params.kappa_b);
  auto F = [&](const ShiftPair& d) {
    return shift_residual(delta, epsilon, bias, n_a, params, d);
  };

  ShiftPair d = seed;
  try {
    ShiftPair r = F(d);
    for (int it = 0; it <= policy.max_iterations; ++it) {
      const double size = std::max({scale, std::abs(d.a), std::abs(d.b)});
      if (inf_norm(r) <= policy.tolerance * size) {
        const Scattering s = response_at_shifts(delta, epsilon, bias, params, d);
        out.alpha = s.alpha;
        out.beta = s.beta;
        out.delta_a = d.a;
        out.delta_b = d.b;
        out.branch = Branch::lower;
        out.iterations = it;
        out.residual = langevin4_residual(delta, epsilon, bias, n_a, params, s);
        return out;
      }
      if (it == policy.max_iterations) break;

      // central-difference Jacobian of the residual map
      const double h = 1e-7 * size;
      const ShiftPair fa_p = F({d.a + h, d.b});
      const ShiftPair fa_m = F({d.a - h, d.b});
      const ShiftPair fb_p = F({d.a, d.b + h});
      const ShiftPair fb_m = F({d.a, d.b - h});
      const double j11 = (fa_p.a - fa_m.a) / (2 * h);
      const double j21 = (fa_p.b - fa_m.b) / (2 * h);
      const double j12 = (fb_p.a - fb_m.a) / (2 * h);
      const double j22 = (fb_p.b - fb_m.b) / (2 * h);
      const double det = j11 * j22 - j12 * j21;
      if (det == 0.0 || !std::isfinite(det)) break;
      const ShiftPair step{(-r.a * j22 + r.b * j12) / det, (-r.b * j11 + r.a * j21) / det};

      double lambda = 1.0;
      ShiftPair trial;
      ShiftPair r_trial;
      while (true) {
        trial = {d.a + lambda * step.a, d.b + lambda * step.b};
        try {
          r_trial = F(trial);
          if (inf_norm(r_trial) < inf_norm(r)) break;
        } catch (const CriticalPoint&) {
        }
        if (lambda * 0.5 < policy.damping_floor) {
          // take the floor step regardless
          r_trial = F(trial);
          break;
        }
        lambda *= 0.5;
      }
      d = trial;
      r = r_trial;
      out.iterations = it + 1;
    }
  } catch (const CriticalPoint&) {
  }
  out.delta_a = d.a;
  out.delta_b = d.b;
  out.branch = Branch::not_converged;
  return out;
}

namespace {

struct Advance {
  bool ok = false;
  DriveResponse response;
  double fold_at = 0.0;
};

// Adaptive continuation from (n_from, seed) to n_to. Fails with the last
// good n_a when the step collapses.
Advance advance(double delta, double epsilon, const PumpBias& bias, const ModeParams& params,
                const ContinuationPolicy& policy, double n_from, const ShiftPair& seed,
                double n_to, double span) {
  Advance out;
  const double max_jump = policy.max_shift_jump * std::min(params.kappa_a, params.kappa_b);
  const double min_step = policy.min_step_fraction * span;
  double cur = n_from;
  ShiftPair d = seed;
  double h = n_to - n_from;
  int successes = 0;
  if (h == 0.0) {
    out.response = newton_kerr(delta, epsilon, bias, n_to, params, policy, d);
    out.ok = out.response.converged();
    out.fold_at = cur;
    return out;
  }
  while (true) {
    const double remaining = n_to - cur;
    const bool last = std::abs(h) >= std::abs(remaining);
    const double step = last ? remaining : h;
    const double target = last ? n_to : cur + step;
    const DriveResponse r = newton_kerr(delta, epsilon, bias, target, params, policy, d);
    const double jump = std::max(std::abs(r.delta_a - d.a), std::abs(r.delta_b - d.b));
    if (r.converged() && jump <= max_jump) {
      cur = target;
      d = {r.delta_a, r.delta_b};
      if (last) {
        out.ok = true;
        out.response = r;
        return out;
      }
      if (++successes >= policy.growth_after) {
        h *= policy.step_growth;
        successes = 0;
      }
    } else {
      successes = 0;
      h = 0.5 * step;
      if (std::abs(h) < min_step) {
        out.fold_at = cur;
        out.response.delta_a = d.a;
        out.response.delta_b = d.b;
        return out;
      }
    }
  }
}

// Solve at n_a after the branch was lost: unrestricted Newton from the last
// shifts, then from the Stark-only state, then from points beyond the last
// shifts since the other branch usually sits further out.
DriveResponse jump_solve(double delta, double epsilon, const PumpBias& bias, double n_a,
                         const ModeParams& params, const ContinuationPolicy& policy,
                         const ShiftPair& last) {
  DriveResponse r = newton_kerr(delta, epsilon, bias, n_a, params, policy, last);
  if (r.converged()) return r;
  const ShiftPair stark = stark_shifts(bias, params);
  r = newton_kerr(delta, epsilon, bias, n_a, params, policy, stark);
  if (r.converged()) return r;
  for (double t : {1.5, 2.0, 3.0, 5.0, 8.0}) {
    const ShiftPair seed{stark.a + t * (last.a - stark.a), stark.b + t * (last.b - stark.b)};
    DriveResponse s = newton_kerr(delta, epsilon, bias, n_a, params, policy, seed);
    if (s.converged()) return s;
  }
  return r;
}

}  // namespace

DriveResponse solve_kerr_response(double delta, double epsilon, const PumpBias& bias, double n_a,
                                  const ModeParams& params, const ContinuationPolicy& policy,
                                  bool* fold) {
  if (!(n_a >= 0.0)) throw std::invalid_argument("n_a must be non-negative");
  if (fold) *fold = false;
  const ShiftPair seed = stark_shifts(bias, params);
  const Advance a = advance(delta, epsilon, bias, params, policy, 0.0, seed, n_a, n_a);
  if (a.ok) return a.response;

  if (a.fold_at > 0.0 || n_a > 0.0) {
    DriveResponse r = jump_solve(delta, epsilon, bias, n_a, params, policy,
                                 {a.response.delta_a, a.response.delta_b});
    if (r.converged()) {
      if (fold) *fold = true;
      r.branch = Branch::upper;
      return r;
    }
  }
  throw NotConverged("Kerr response did not converge");
}

namespace {

void run_sweep(double delta, double epsilon, const PumpBias& bias, const std::vector<double>& grid,
               const std::vector<std::size_t>& order, const ModeParams& params,
               const ContinuationPolicy& policy, DriveResponse start,
               std::vector<DriveResponse>& out, std::vector<double>& folds) {
  const double span = grid.back() - grid.front();
  out.assign(grid.size(), DriveResponse{});
  out[order[0]] = start;
  Branch label = start.branch;
  ShiftPair d{start.delta_a, start.delta_b};
  double n_prev = grid[order[0]];
  bool have_state = start.converged();

  for (std::size_t k = 1; k < order.size(); ++k) {
    const std::size_t idx = order[k];
    const double n = grid[idx];
    DriveResponse r;
    if (have_state) {
      const Advance a = advance(delta, epsilon, bias, params, policy, n_prev, d, n, span);
      if (a.ok) {
        r = a.response;
        r.branch = label;
      } else {
        folds.push_back(a.fold_at);
        r = jump_solve(delta, epsilon, bias, n, params, policy,
                       {a.response.delta_a, a.response.delta_b});
        if (r.converged()) {
          label = label == Branch::lower ? Branch::upper : Branch::lower;
          r.branch = label;
        }
      }
    } else {
      r = jump_solve(delta, epsilon, bias, n, params, policy, d);
      if (r.converged()) r.branch = label;
    }
    out[idx] = r;
    if (r.converged()) {
      d = {r.delta_a, r.delta_b};
      have_state = true;
    }
    n_prev = n;
  }
}

bool same_state(const DriveResponse& x, const DriveResponse& y, double kappa) {
  const double tol = 1e-6 * kappa;
  return std::abs(x.delta_a - y.delta_a) <= tol + 1e-9 * std::abs(x.delta_a) &&
         std::abs(x.delta_b - y.delta_b) <= tol + 1e-9 * std::abs(x.delta_b);
}

}  // namespace

SignalSweep sweep_signal_power(double delta, double epsilon, const PumpBias& bias,
                               const std::vector<double>& n_a_grid, SweepDirection direction,
                               const ModeParams& params, const ContinuationPolicy& policy) {
  if (n_a_grid.size() < 2) throw std::invalid_argument("sweep grid needs at least two points");
  for (std::size_t i = 1; i < n_a_grid.size(); ++i)
    if (!(n_a_grid[i] > n_a_grid[i - 1]))
      throw std::invalid_argument("sweep grid must be strictly increasing");
  if (!(n_a_grid.front() >= 0.0)) throw std::invalid_argument("n_a must be non-negative");

  SignalSweep out;
  out.n_a = n_a_grid;
  const std::size_t n = n_a_grid.size();
  std::vector<std::size_t> up_order(n);
  for (std::size_t i = 0; i < n; ++i) up_order[i] = i;

  DriveResponse first = solve_kerr_response(delta, epsilon, bias, n_a_grid.front(), params, policy);
  first.branch = Branch::lower;
  std::vector<DriveResponse> up;
  run_sweep(delta, epsilon, bias, n_a_grid, up_order, params, policy, first, up, out.folds_up);

  if (direction == SweepDirection::up || direction == SweepDirection::both) out.up = up;
  if (direction == SweepDirection::up) return out;

  std::vector<std::size_t> down_order(up_order.rbegin(), up_order.rend());
  DriveResponse top = up.back();
  if (!top.converged()) top = solve_kerr_response(delta, epsilon, bias, n_a_grid.back(), params, policy);
  run_sweep(delta, epsilon, bias, n_a_grid, down_order, params, policy, top, out.down,
            out.folds_down);
  std::reverse(out.folds_down.begin(), out.folds_down.end());

  // relabel the down-sweep against the up-sweep and locate the window
  const double kappa = params.kappa_mean();
  std::optional<std::size_t> first_diff, last_diff;
  for (std::size_t i = 0; i < n; ++i) {
    DriveResponse& r = out.down[i];
    if (!r.converged() || !up[i].converged()) continue;
    if (same_state(r, up[i], kappa)) {
      r.branch = up[i].branch;
    } else {
      r.branch = up[i].branch == Branch::lower ? Branch::upper : Branch::lower;
      if (!first_diff) first_diff = i;
      last_diff = i;
    }
  }
  if (first_diff) out.hysteresis = std::make_pair(n_a_grid[*first_diff], n_a_grid[*last_diff]);
  return out;
}

}  // namespace kerrparamp
