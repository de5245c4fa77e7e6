#pragma once

#include <cmath>

namespace ccag {

// Golden-section maximization of a unimodal function on [lo, hi].
// Returns the bracket midpoint once the bracket width drops below xtol.
template <typename F>
double golden_max(F&& f, double lo, double hi, double xtol, int max_iter = 256) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;   // 1/phi
  const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;  // 1/phi^2
  double a = lo, b = hi;
  double h = b - a;
  if (h <= xtol) return (a + b) / 2.0;
  double c = a + invphi2 * h;
  double d = a + invphi * h;
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && h > xtol; ++i) {
    h *= invphi;
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = a + invphi2 * h;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * h;
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace ccag
