#include "core/zonal.hpp"

#include <cmath>

#include "core/common.hpp"

namespace rhflow {

double zonal_eigenvalue(int dim, int k) { return static_cast<double>(k) * (k + dim - 1); }

double zonal_multiplicity(int dim, int k) {
  if (k == 0) return 1.0;
  double log_binom = std::lgamma(k + dim - 1.0) - std::lgamma(k + 1.0) - std::lgamma(dim);
  return (2.0 * k + dim - 1.0) * std::exp(log_binom);
}

namespace {

// Gegenbauer recurrence C_k^lambda with lambda = (dim-1)/2, normalized by the
// value at 1 where |C_k^lambda| attains its maximum, so every entry stays in
// [-1, 1] and the recurrence is stable in double precision.
void zonal_row_sweep(int dim, int kmax, const Vec& x, Mat* table, int single_k, Vec* row_out) {
  double lambda = 0.5 * (dim - 1);
  int n = static_cast<int>(x.size());
  Vec prev = Vec::Ones(n);           // C_0
  Vec cur = (2.0 * lambda) * x;      // C_1
  double at1_prev = 1.0;
  double at1_cur = 2.0 * lambda;
  auto emit = [&](int k, const Vec& c, double at1) {
    if (table) table->row(k) = (c / at1).transpose();
    if (row_out && k == single_k) *row_out = c / at1;
  };
  emit(0, prev, at1_prev);
  if (kmax >= 1) emit(1, cur, at1_cur);
  for (int k = 2; k <= kmax; ++k) {
    Vec next = (2.0 * (k + lambda - 1.0) * x.cwiseProduct(cur) - (k + 2.0 * lambda - 2.0) * prev) / k;
    double at1 = (2.0 * (k + lambda - 1.0) * at1_cur - (k + 2.0 * lambda - 2.0) * at1_prev) / k;
    emit(k, next, at1);
    prev.swap(cur);
    cur = std::move(next);
    at1_prev = at1_cur;
    at1_cur = at1;
  }
}

}  // namespace

double zonal_eval(int dim, int k, double x) {
  Vec xv = Vec::Constant(1, x);
  Vec row;
  zonal_row_sweep(dim, k, xv, nullptr, k, &row);
  return row[0];
}

Mat zonal_table(int dim, int kmax, const Vec& x) {
  if (kmax < 0) fail(Errc::bad_config, "zonal_table needs kmax >= 0");
  Mat table(kmax + 1, x.size());
  zonal_row_sweep(dim, kmax, x, &table, -1, nullptr);
  return table;
}

}  // namespace rhflow
