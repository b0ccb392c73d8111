#include "kerrparamp/peak_search.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>

#include "kerrparamp/errors.hpp"

namespace kerrparamp {

Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                int samples, double x_tolerance) {
  if (!(hi > lo) || samples < 3) throw BracketFailure("empty search interval");
  const double dx = (hi - lo) / (samples - 1);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double v = f(lo + i * dx);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == 0 || best == samples - 1)
    throw BracketFailure("no interior maximum in search interval");

  double a = lo + (best - 1) * dx;
  double b = lo + (best + 1) * dx;
  const double tol = x_tolerance > 0.0 ? x_tolerance : 1e-10 * std::max(dx, std::abs(b));
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw BracketFailure("root not bracketed");
  std::uintmax_t iterations = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 2);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iterations);
  return 0.5 * (a + b);
}

}  // namespace kerrparamp
