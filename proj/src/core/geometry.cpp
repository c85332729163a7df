#include "core/geometry.hpp"

#include <cmath>

#include "core/common.hpp"
#include "core/zonal.hpp"

namespace rhflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double int_pow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// exact integral of sin^(n-1) over [0, pi]: sqrt(pi) Gamma(n/2) / Gamma((n+1)/2)
double sin_power_integral(int n) {
  return std::sqrt(kPi) * std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n + 1)));
}

double winding_kappa(const ManifoldConfig& cfg) {
  return 2.0 * kPi * cfg.winding / cfg.torus_lengths[0];
}

}  // namespace

double sphere_surface_area(int n) {
  return 2.0 * std::pow(kPi, 0.5 * (n + 1)) / std::exp(std::lgamma(0.5 * (n + 1)));
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

GeometryState initial_state(const ManifoldConfig& cfg) {
  cfg.validate();
  GeometryState st;
  st.t = 0.0;
  switch (cfg.variant) {
    case Variant::round_sphere:
      st.metric = Vec::Constant(1, cfg.r2_0);
      break;
    case Variant::torus_linear:
      st.metric = Vec(3);
      for (int a = 0; a < 3; ++a) st.metric[a] = cfg.torus_metric0[a];
      break;
    case Variant::coupled_circle:
      st.metric = cfg.a_samples0;
      st.map = cfg.psi_samples0;
      break;
  }
  return st;
}

int grid_size(const ManifoldConfig& cfg) { return cfg.grid; }

Vec grid_nodes(const ManifoldConfig& cfg) {
  int n = cfg.grid;
  Vec x(n);
  if (cfg.is_sphere()) {
    double h = kPi / n;
    for (int j = 0; j < n; ++j) x[j] = (j + 0.5) * h;
  } else {
    double h = cfg.torus_lengths[0] / n;
    for (int i = 0; i < n; ++i) x[i] = i * h;
  }
  return x;
}

Vec measure_weights(const ManifoldConfig& cfg, const GeometryState& st) {
  int n = cfg.grid;
  int dim = cfg.dimension;
  Vec w(n);
  switch (cfg.variant) {
    case Variant::round_sphere: {
      double h = kPi / n;
      double c = st.metric[0];
      if (!(c > 0.0)) fail(Errc::degenerate_metric, "sphere conformal factor <= 0");
      double raw_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        w[j] = int_pow(std::sin((j + 0.5) * h), dim - 1);
        raw_sum += w[j] * h;
      }
      // normalize so constants integrate to the exact volume
      double scale = sphere_surface_area(dim - 1) * std::pow(c, 0.5 * dim) * h *
                     (sin_power_integral(dim) / raw_sum);
      w *= scale;
      return w;
    }
    case Variant::torus_linear: {
      double density = std::sqrt(st.metric[0] * st.metric[1] * st.metric[2]);
      double h1 = cfg.torus_lengths[0] / n;
      double cell = density * h1 * cfg.torus_lengths[1] * cfg.torus_lengths[2];
      return Vec::Constant(n, cell);
    }
    case Variant::coupled_circle: {
      double h1 = cfg.torus_lengths[0] / n;
      double flat = cfg.torus_lengths[1] * cfg.torus_lengths[2];
      for (int i = 0; i < n; ++i) {
        if (!(st.metric[i] > 0.0)) fail(Errc::degenerate_metric, "A sample <= 0");
        w[i] = std::sqrt(st.metric[i]) * h1 * flat;
      }
      return w;
    }
  }
  fail(Errc::unsupported_variant, "measure_weights");
}

double integrate(const ManifoldConfig& cfg, const GeometryState& st, const ScalarField& f) {
  Vec w = measure_weights(cfg, st);
  if (f.values.size() != w.size())
    fail(Errc::bad_config, "field size does not match the grid");
  return w.dot(f.values);
}

double analytic_volume(const ManifoldConfig& cfg, const GeometryState& st) {
  switch (cfg.variant) {
    case Variant::round_sphere:
      return sphere_surface_area(cfg.dimension) * std::pow(st.metric[0], 0.5 * cfg.dimension);
    case Variant::torus_linear:
      return std::sqrt(st.metric[0] * st.metric[1] * st.metric[2]) * cfg.torus_lengths[0] *
             cfg.torus_lengths[1] * cfg.torus_lengths[2];
    case Variant::coupled_circle:
      return measure_weights(cfg, st).sum();
  }
  fail(Errc::unsupported_variant, "analytic_volume");
}

Mat periodic_d1(int n, double length) {
  Mat d = Mat::Zero(n, n);
  double h = length / n;
  if (is_power_of_two(n)) {
    // spectral differentiation on an even periodic grid
    double scale = kPi / length;  // (2*pi/L) * (1/2)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k) continue;
        int m = j - k;
        double sign = (m & 1) ? -1.0 : 1.0;
        d(j, k) = scale * sign / std::tan(kPi * m / n);
      }
  } else {
    for (int j = 0; j < n; ++j) {
      d(j, (j + 1) % n) += 8.0 / (12.0 * h);
      d(j, (j - 1 + n) % n) -= 8.0 / (12.0 * h);
      d(j, (j + 2) % n) -= 1.0 / (12.0 * h);
      d(j, (j - 2 + n) % n) += 1.0 / (12.0 * h);
    }
  }
  return d;
}

Mat periodic_d2(int n, double length) {
  Mat d = Mat::Zero(n, n);
  double h = length / n;
  if (is_power_of_two(n)) {
    double ang = 2.0 * kPi / n;                       // grid spacing in angle
    double scale = (2.0 * kPi / length) * (2.0 * kPi / length);
    double diag = -(kPi * kPi / (3.0 * ang * ang) + 1.0 / 6.0) * scale;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (j == k) {
          d(j, j) = diag;
          continue;
        }
        int m = j - k;
        double sign = (m & 1) ? 1.0 : -1.0;
        double s = std::sin(0.5 * ang * m);
        d(j, k) = sign / (2.0 * s * s) * scale;
      }
    }
  } else {
    for (int j = 0; j < n; ++j) {
      d(j, j) -= 30.0 / (12.0 * h * h);
      d(j, (j + 1) % n) += 16.0 / (12.0 * h * h);
      d(j, (j - 1 + n) % n) += 16.0 / (12.0 * h * h);
      d(j, (j + 2) % n) -= 1.0 / (12.0 * h * h);
      d(j, (j - 2 + n) % n) -= 1.0 / (12.0 * h * h);
    }
  }
  return d;
}

Vec filter_nyquist_band(const Vec& v) {
  int n = static_cast<int>(v.size());
  if (n % 2 != 0) return v;
  double coef = 0.0;
  for (int i = 0; i < n; ++i) coef += (i & 1) ? -v[i] : v[i];
  coef /= n;
  Vec out = v;
  for (int i = 0; i < n; ++i) out[i] -= (i & 1) ? -coef : coef;
  return out;
}

int factor_count(const ManifoldConfig& cfg) { return cfg.is_sphere() ? 1 : 3; }

int factor_size(const ManifoldConfig& cfg, int) { return cfg.grid; }

Vec factor_weights(const ManifoldConfig& cfg, const GeometryState& st, int f) {
  int n = cfg.grid;
  if (cfg.is_sphere()) return measure_weights(cfg, st);
  double h = cfg.torus_lengths[f] / n;
  if (cfg.variant == Variant::torus_linear)
    return Vec::Constant(n, std::sqrt(st.metric[f]) * h);
  // coupled_circle: x1 carries the density, flat coordinates have unit metric
  if (f == 0) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = std::sqrt(st.metric[i]) * h;
    return w;
  }
  return Vec::Constant(n, h);
}

bool factor_coef_is_scalar(const ManifoldConfig& cfg, int f) {
  return !(cfg.variant == Variant::coupled_circle && f == 0);
}

double factor_scalar_coef(const ManifoldConfig& cfg, const GeometryState& st, int f) {
  switch (cfg.variant) {
    case Variant::round_sphere:
      return st.metric[0];
    case Variant::torus_linear:
      return st.metric[f];
    case Variant::coupled_circle:
      if (f == 0) fail(Errc::unsupported_variant, "coupled x1 factor has no scalar coefficient");
      return 1.0;
  }
  fail(Errc::unsupported_variant, "factor_scalar_coef");
}

Mat factor_base_matrix(const ManifoldConfig& cfg, int f) {
  int n = cfg.grid;
  if (!cfg.is_sphere()) {
    if (!factor_coef_is_scalar(cfg, f))
      fail(Errc::unsupported_variant, "coupled x1 factor operator depends on the state");
    return periodic_d2(n, cfg.torus_lengths[f]);
  }
  // Spectral zonal form. The midpoint quadrature with weight sin^(n-1) is
  // exactly orthogonal on the zonal degrees the grid resolves, so the
  // operator is assembled from the eigen-expansion L = -T diag(mu_k / g_k)
  // T^T diag(w) with measured Gram diagonals g_k = <Z_k, Z_k>_w. Written as
  // -(1/w) B B^T with B = diag(w) T diag(sqrt(mu_k / g_k)), the weighted
  // operator is symmetric and negative semidefinite to the last bit, constants
  // are annihilated exactly (mu_0 = 0 and <Z_k, 1>_w = 0 in band), and every
  // resolved mode carries its continuum eigenvalue, so there is no spatial
  // dispersion on the alias-free band.
  int dim = cfg.dimension;
  double h = kPi / n;
  Vec w(n);
  for (int j = 0; j < n; ++j) w[j] = int_pow(std::sin((j + 0.5) * h), dim - 1) * h;
  Vec x(n);
  for (int j = 0; j < n; ++j) x[j] = std::cos((j + 0.5) * h);
  Mat t = zonal_table(dim, n - 1, x).transpose();  // column k holds Z_k samples
  Mat b = w.asDiagonal() * t;
  for (int k = 0; k < n; ++k) {
    double gram = b.col(k).dot(t.col(k));
    b.col(k) *= std::sqrt(zonal_eigenvalue(dim, k) / gram);
  }
  Mat lap = -(b * b.transpose());
  lap = w.cwiseInverse().asDiagonal() * lap;
  return lap;
}

Mat coupled_x1_operator(const ManifoldConfig& cfg, const GeometryState& st) {
  if (cfg.variant != Variant::coupled_circle)
    fail(Errc::unsupported_variant, "coupled_x1_operator");
  int n = cfg.grid;
  Mat d1 = periodic_d1(n, cfg.torus_lengths[0]);
  Vec inv_sqrt_a(n);
  for (int i = 0; i < n; ++i) {
    if (!(st.metric[i] > 0.0)) fail(Errc::degenerate_metric, "A sample <= 0");
    inv_sqrt_a[i] = 1.0 / std::sqrt(st.metric[i]);
  }
  Mat inner = d1 * inv_sqrt_a.asDiagonal() * d1;
  return inv_sqrt_a.asDiagonal() * inner;
}

Mat laplacian_matrix(const ManifoldConfig& cfg, const GeometryState& st) {
  switch (cfg.variant) {
    case Variant::round_sphere:
      return factor_base_matrix(cfg, 0) / st.metric[0];
    case Variant::torus_linear:
      // reduced fields depend on x1 only, so only the x1 term acts
      return periodic_d2(cfg.grid, cfg.torus_lengths[0]) / st.metric[0];
    case Variant::coupled_circle:
      return coupled_x1_operator(cfg, st);
  }
  fail(Errc::unsupported_variant, "laplacian_matrix");
}

ScalarField laplacian_apply(const ManifoldConfig& cfg, const GeometryState& st,
                            const ScalarField& f) {
  if (f.values.size() != cfg.grid) fail(Errc::bad_config, "field size does not match the grid");
  return ScalarField{laplacian_matrix(cfg, st) * f.values};
}

CurvatureData curvature(const ManifoldConfig& cfg, const GeometryState& st) {
  int n = cfg.grid;
  double alpha = cfg.coupling.value(st.t);
  CurvatureData out;
  out.R = Vec::Zero(n);
  out.grad_phi_sq = Vec::Zero(n);
  out.tension = Vec::Zero(n);
  for (int a = 0; a < 3; ++a) {
    out.ric_diag[a] = Vec::Zero(n);
    out.s_diag[a] = Vec::Zero(n);
  }
  switch (cfg.variant) {
    case Variant::round_sphere: {
      int dim = cfg.dimension;
      double c = st.metric[0];
      out.R = Vec::Constant(n, dim * (dim - 1) / c);
      for (int a = 0; a < 3; ++a) {
        out.ric_diag[a] = Vec::Constant(n, (dim - 1) / c);
        out.s_diag[a] = out.ric_diag[a];
      }
      break;
    }
    case Variant::torus_linear: {
      double kappa = winding_kappa(cfg);
      double gps = kappa * kappa / st.metric[0];
      out.grad_phi_sq = Vec::Constant(n, gps);
      out.s_diag[0] = Vec::Constant(n, -alpha * gps);
      break;
    }
    case Variant::coupled_circle: {
      double kappa = winding_kappa(cfg);
      Mat d1 = periodic_d1(n, cfg.torus_lengths[0]);
      Vec phi_prime = d1 * st.map;
      phi_prime.array() += kappa;
      Vec inv_sqrt_a(n);
      for (int i = 0; i < n; ++i) inv_sqrt_a[i] = 1.0 / std::sqrt(st.metric[i]);
      for (int i = 0; i < n; ++i) {
        double gps = phi_prime[i] * phi_prime[i] / st.metric[i];
        out.grad_phi_sq[i] = gps;
        out.s_diag[0][i] = -alpha * gps;
      }
      // tension tau(phi) = (1/sqrt A) d/dx ( (1/sqrt A) phi' ), the self-adjoint
      // grouping of (1/A)(phi'' - A'/(2A) phi')
      Vec flux = inv_sqrt_a.cwiseProduct(phi_prime);
      out.tension = inv_sqrt_a.cwiseProduct(d1 * flux);
      break;
    }
  }
  out.S = out.R - alpha * out.grad_phi_sq;
  return out;
}

double min_S(const ManifoldConfig& cfg, const GeometryState& st) {
  return curvature(cfg, st).S.minCoeff();
}

double max_S(const ManifoldConfig& cfg, const GeometryState& st) {
  return curvature(cfg, st).S.maxCoeff();
}

}  // namespace rhflow
