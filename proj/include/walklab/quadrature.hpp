#pragma once

// Adaptive Simpson quadrature. The closed-form densities are piecewise-smooth
// monotone tails, so plain Simpson with interval splitting at the kink points
// reaches 1e-10 absolute accuracy quickly.

#include <cmath>
#include <span>
#include <vector>

namespace walklab {

namespace detail {

template <class F>
double simpson(F&& f, double a, double fa, double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_step(F&& f, double a, double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 48) {
  if (!(a < b)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

// Integrates over [a, b] split at interior breakpoints (density kinks).
template <class F>
double integrate_with_breaks(F&& f, double a, double b, std::span<const double> breaks,
                             double abs_tol = 1e-10) {
  std::vector<double> cuts{a};
  for (double c : breaks)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    total += adaptive_simpson(f, cuts[i - 1], cuts[i], abs_tol / static_cast<double>(cuts.size()));
  return total;
}

}  // namespace walklab
