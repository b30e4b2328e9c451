#pragma once

#include <cmath>
#include <functional>

#include "ncosc/errors.hpp"

namespace ncosc {

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Absolute tolerance `tol` is split evenly between halves on refinement.
/// Recursion stops at `max_depth` bisections (2^20 leaf intervals by default),
/// where the current estimate is accepted.
class AdaptiveSimpson {
 public:
  explicit AdaptiveSimpson(double tol = 1e-10, int max_depth = 20)
      : tol_(tol), max_depth_(max_depth) {
    if (!(tol > 0.0)) throw invalid_parameter("quadrature tolerance must be > 0");
  }

  double tolerance() const { return tol_; }

  template <class F>
  double operator()(F&& f, double a, double b) const {
    if (a == b) return 0.0;
    if (b < a) return -(*this)(f, b, a);
    const double fa = eval(f, a);
    const double fb = eval(f, b);
    const double m = 0.5 * (a + b);
    const double fm = eval(f, m);
    const double whole = simpson(a, b, fa, fm, fb);
    return refine(f, a, b, fa, fm, fb, whole, tol_, 0);
  }

 private:
  static double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  template <class F>
  static double eval(F& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw numerical_failure("quadrature integrand is not finite");
    return v;
  }

  template <class F>
  double refine(F& f, double a, double b, double fa, double fm, double fb, double whole,
                double tol, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(f, lm);
    const double frm = eval(f, rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth >= max_depth_ || std::abs(delta) <= 15.0 * tol)
      return left + right + delta / 15.0;
    return refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }

  double tol_;
  int max_depth_;
};

}  // namespace ncosc
