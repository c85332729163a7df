// 1-D quadrature helpers: adaptive Simpson with an absolute tolerance and a
// fixed-panel composite Simpson used for double-resolution cross-checks.
#pragma once

#include <functional>

namespace rhflow {

struct QuadratureOptions {
  double abs_tol = 1e-8;
  int max_depth = 40;
};

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opt = {});

double fixed_simpson(const std::function<double(double)>& f, double a, double b, int panels);

}  // namespace rhflow
