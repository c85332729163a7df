#include "core/quadrature.hpp"

#include <cmath>

#include "core/common.hpp"

namespace rhflow {

namespace {

// Classic recursive scheme: the 15x factor comes from the Richardson error
// model of Simpson's rule (order 4).
double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth <= 0)
    fail(Errc::quadrature_failed,
         strprintf("adaptive Simpson: depth limit before reaching tol on [%g,%g]", a, b));
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opt) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson(fa, fm, fb, b - a);
  return sign * adapt(f, a, b, fa, fm, fb, whole, opt.abs_tol, opt.max_depth);
}

double fixed_simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels < 1) panels = 1;
  double h = (b - a) / panels;
  double acc = 0.0;
  double fl = f(a);
  for (int i = 0; i < panels; ++i) {
    double xr = a + (i + 1) * h;
    double fm = f(a + (i + 0.5) * h);
    double fr = (i + 1 == panels) ? f(b) : f(xr);
    acc += simpson(fl, fm, fr, h);
    fl = fr;
  }
  return acc;
}

}  // namespace rhflow
