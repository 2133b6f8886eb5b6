#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace longi::quad {

namespace detail {

template <typename T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <typename F, typename T>
T simpson_step(const F& f, double a, double b, T fa, T fm, T fb, T whole, double tol,
               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const T flm = f(lm);
  const T frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T delta = left + right - whole;
  if (depth <= 0 || magnitude(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
/// Works for real- and complex-valued integrands. The interval is split into
/// `initial_panels` panels first so that oscillatory integrands cannot fool
/// the first error estimate.
template <typename F>
auto adaptive_simpson(const F& f, double a, double b, double tol, int initial_panels = 8,
                      int max_depth = 48) {
  using T = std::decay_t<decltype(f(a))>;
  T total{};
  if (b == a) return total;
  const double h = (b - a) / initial_panels;
  for (int k = 0; k < initial_panels; ++k) {
    const double lo = a + k * h;
    const double hi = (k + 1 == initial_panels) ? b : lo + h;
    const T flo = f(lo);
    const T fhi = f(hi);
    const T fmid = f(0.5 * (lo + hi));
    const T whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / initial_panels,
                                  max_depth);
  }
  return total;
}

}  // namespace longi::quad
