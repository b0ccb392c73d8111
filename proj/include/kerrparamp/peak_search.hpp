#pragma once

#include <functional>

namespace kerrparamp {

struct Maximum {
  double x = 0.0;
  double value = 0.0;
};

/// Scan `samples` equally spaced points of [lo, hi] and refine the best
/// interior sample by golden-section search. Throws BracketFailure when the
/// best sample sits on the boundary.
Maximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                int samples = 401, double x_tolerance = 0.0);

/// Root of `f` in [lo, hi]; f(lo) and f(hi) must differ in sign.
double bracketed_root(const std::function<double(double)>& f, double lo, double hi);

}  // namespace kerrparamp
