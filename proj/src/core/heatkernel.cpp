#include "core/heatkernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "core/common.hpp"
#include "core/geometry.hpp"
#include "core/zonal.hpp"

namespace rhflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// ---- closed-form building blocks ----------------------------------------

// sum_k exp(-mu_k T) (m_k / omega_n) Z_k(x) accumulated with a running
// recurrence; hard_cap limits the degree (used to keep initial data inside
// the alias-free band of the grid), hard_cap < 0 means tail-tolerance
// truncation only.
Vec sphere_heat_profile(int dim, double T, const Vec& x, double tail_tol, int hard_cap) {
  if (!(T > 0.0)) fail(Errc::bad_time_order, "sphere spectral sum needs positive effective time");
  double omega_n = sphere_surface_area(dim);
  double lambda = 0.5 * (dim - 1);
  int n = static_cast<int>(x.size());
  Vec acc = Vec::Zero(n);
  Vec prev = Vec::Ones(n);       // C_0
  Vec cur = (2.0 * lambda) * x;  // C_1
  double at1_prev = 1.0;
  double at1_cur = 2.0 * lambda;
  double sup_acc = 0.0;
  for (int k = 0;; ++k) {
    if (k > 100000) fail(Errc::series_not_converged, "zonal heat series needs too many terms");
    double mu = zonal_eigenvalue(dim, k);
    double coeff = std::exp(-mu * T) * zonal_multiplicity(dim, k) / omega_n;
    if (k == 0)
      acc.array() += coeff;
    else if (k == 1)
      acc += (coeff / at1_cur) * cur;
    else {
      Vec next =
          (2.0 * (k + lambda - 1.0) * x.cwiseProduct(cur) - (k + 2.0 * lambda - 2.0) * prev) / k;
      double at1 = (2.0 * (k + lambda - 1.0) * at1_cur - (k + 2.0 * lambda - 2.0) * at1_prev) / k;
      acc += (coeff / at1) * next;
      prev.swap(cur);
      cur = std::move(next);
      at1_prev = at1_cur;
      at1_cur = at1;
    }
    sup_acc += coeff;
    if (hard_cap >= 0 && k >= hard_cap) break;
    if (mu * T > 2.0 && coeff < tail_tol * std::max(1.0, sup_acc)) break;
  }
  return acc;
}

// periodic heat kernel on a circle of circumference L, unit mass in dx
double wrapped_heat_1d(double d, double T, double L, double tail_tol) {
  if (!(T > 0.0)) fail(Errc::bad_time_order, "wrapped kernel needs positive effective time");
  if (T > L * L / (4.0 * kPi)) {
    // Fourier representation
    double acc = 1.0 / L;
    for (int m = 1;; ++m) {
      double w = 2.0 * kPi * m / L;
      double term = (2.0 / L) * std::exp(-w * w * T) * std::cos(w * d);
      acc += term;
      if (std::abs(term) < tail_tol * std::max(std::abs(acc), 1.0 / L) && m >= 2) break;
      if (m > 100000) fail(Errc::series_not_converged, "Fourier heat sum stalled");
    }
    return acc;
  }
  // Gaussian image representation
  double base = std::remainder(d, L);
  double acc = 0.0;
  double norm = 1.0 / std::sqrt(4.0 * kPi * T);
  for (int m = 0;; ++m) {
    double term = std::exp(-(base - m * L) * (base - m * L) / (4.0 * T));
    if (m > 0) term += std::exp(-(base + m * L) * (base + m * L) / (4.0 * T));
    acc += term;
    if (term < tail_tol * std::max(acc, 1.0) && m >= 1) break;
    if (m > 100000) fail(Errc::series_not_converged, "image heat sum stalled");
  }
  return norm * acc;
}

// Fourier-truncated kernel profile on the n-point grid, offset from node iy.
// Modes are capped strictly below the grid Nyquist band so the trapezoid
// quadrature of the result (and of its products with equally banded fields)
// is exact, which is what makes the discrete mass identities hold.
Vec banded_circle_profile(int n, double L, int iy, double T, int mmax) {
  Vec u = Vec::Constant(n, 1.0 / L);
  for (int m = 1; m <= mmax; ++m) {
    double w = 2.0 * kPi * m / L;
    double damp = (2.0 / L) * std::exp(-w * w * T);
    if (damp < 1e-300) break;
    for (int i = 0; i < n; ++i) {
      double ang = 2.0 * kPi * m * (i - iy) / n;
      u[i] += damp * std::cos(ang);
    }
  }
  return u;
}

// ---- Crank-Nicolson drivers ----------------------------------------------

// Crank-Nicolson with a short fully implicit startup. The initial slices are
// near-delta fields whose band-edge modes have mu * h >> 1; plain CN leaves
// those ringing at |amp| ~ 1 - 4/(mu h) per step. A few backward-Euler steps
// remove that band while keeping the overall second-order accuracy, and both
// schemes preserve the weighted-mass identities exactly (the weighted column
// sums of L vanish).
constexpr int kImplicitStartupSteps = 4;

void cn_evolve_const(const Mat& L, Vec& u, double T, int steps) {
  if (!(T > 0.0) || steps <= 0) return;
  double h = T / steps;
  int n = static_cast<int>(u.size());
  int damped = std::min(kImplicitStartupSteps, steps);
  {
    Eigen::PartialPivLU<Mat> lu(Mat::Identity(n, n) - h * L);
    for (int k = 0; k < damped; ++k) u = lu.solve(u);
  }
  if (damped == steps) return;
  Mat a = Mat::Identity(n, n) - (0.5 * h) * L;
  Mat b = Mat::Identity(n, n) + (0.5 * h) * L;
  Eigen::PartialPivLU<Mat> lu(a);
  for (int k = damped; k < steps; ++k) u = lu.solve(b * u);
}

// coupled x1 factor, forward heat equation in physical time. Centered
// first-derivative stencils annihilate the alternating band, so the assembled
// operator has it in its kernel while the variable coefficient keeps
// scattering content into it; the band is projected out after every step so
// nothing can park there.
void cn_evolve_coupled_forward(const FlowTrajectory& traj, Vec& u, double ta, double tb,
                               int steps) {
  const ManifoldConfig& cfg = traj.manifold();
  double h = (tb - ta) / steps;
  int n = static_cast<int>(u.size());
  for (int k = 0; k < steps; ++k) {
    double tm = ta + (k + 0.5) * h;
    Mat lap = coupled_x1_operator(cfg, traj.state_at(tm));
    if (k < kImplicitStartupSteps) {
      u = Eigen::PartialPivLU<Mat>(Mat::Identity(n, n) - h * lap).solve(u);
    } else {
      Mat a = Mat::Identity(n, n) - (0.5 * h) * lap;
      Mat b = Mat::Identity(n, n) + (0.5 * h) * lap;
      u = Eigen::PartialPivLU<Mat>(a).solve(b * u);
    }
    u = filter_nyquist_band(u);
  }
}

// coupled x1 factor, conjugate equation stepped from tau_hi down to tau_lo
void cn_evolve_coupled_conjugate(const FlowTrajectory& traj, Vec& u, double tau_hi,
                                 double tau_lo, int steps) {
  const ManifoldConfig& cfg = traj.manifold();
  double h = (tau_hi - tau_lo) / steps;
  int n = static_cast<int>(u.size());
  for (int k = 0; k < steps; ++k) {
    double tm = tau_hi - (k + 0.5) * h;
    GeometryState st = traj.state_at(tm);
    Mat op = coupled_x1_operator(cfg, st);
    op -= curvature(cfg, st).S.asDiagonal();
    if (k < kImplicitStartupSteps) {
      u = Eigen::PartialPivLU<Mat>(Mat::Identity(n, n) - h * op).solve(u);
    } else {
      Mat a = Mat::Identity(n, n) - (0.5 * h) * op;
      Mat b = Mat::Identity(n, n) + (0.5 * h) * op;
      u = Eigen::PartialPivLU<Mat>(a).solve(b * u);
    }
    u = filter_nyquist_band(u);
  }
}

int cn_steps(const KernelParams& kp, double work, double total_phys) {
  double frac = work / std::max(total_phys, 1e-300);
  return std::max(8, static_cast<int>(std::ceil(kp.min_steps * frac)));
}

// steps for a scalar-coefficient factor over [ta, tb]: uniform steps in
// effective time dT correspond to physical steps up to coef_max * dT
int cn_steps_scalar(const FlowTrajectory& traj, const KernelParams& kp, int factor, double ta,
                    double tb, double dT, double total_phys) {
  auto coef = [&](double tau) {
    const ManifoldConfig& cfg = traj.manifold();
    if (cfg.variant == Variant::coupled_circle) return 1.0;
    GeometryState st = traj.state_at(tau);
    return st.metric[cfg.is_sphere() ? 0 : factor];
  };
  double cmax = std::max({coef(ta), coef(0.5 * (ta + tb)), coef(tb)});
  return cn_steps(kp, cmax * dT, total_phys);
}

double sphere_c_at(const FlowTrajectory& traj, double tau) {
  return traj.state_at(tau).metric[0];
}

Vec cos_grid(const ManifoldConfig& cfg) {
  Vec nodes = grid_nodes(cfg);
  return nodes.array().cos();
}

void check_times(const FlowTrajectory& traj, double s, double t) {
  double slack = 1e-12 * std::max(1.0, traj.t_end());
  if (!(s < t)) fail(Errc::bad_time_order, "need s < t");
  if (s < -slack || t > traj.t_end() + slack)
    fail(Errc::bad_time_order, "sample times outside the trajectory range");
}

// Degrees above n - 1 alias onto low zonal modes on the n-point cell-centered
// grid (sin((2n - j) theta_i) == sin(j theta_i) there), so the initial band
// must stop below n. The midpoint quadrature is exact through degree 2n - 1,
// so the capped field still carries its mass identities exactly, and every
// dropped mode is extinct at the earliest queried time.
int init_band_cap_sphere(int n) { return n - 1; }
int init_band_cap_circle(int n) { return n / 2 - 1; }

}  // namespace

// ---- KernelField ----------------------------------------------------------

double KernelField::value_at(const std::array<int, 3>& node) const {
  double v = 1.0;
  for (int f = 0; f < factors; ++f) v *= profile[f][node[f]];
  return v;
}

double KernelField::max_abs() const {
  double v = 1.0;
  for (int f = 0; f < factors; ++f) v *= profile[f].cwiseAbs().maxCoeff();
  return v;
}

double KernelField::min_value() const {
  double lo = 1.0, hi = 1.0;
  for (int f = 0; f < factors; ++f) {
    double flo = profile[f].minCoeff();
    double fhi = profile[f].maxCoeff();
    double cands[4] = {lo * flo, lo * fhi, hi * flo, hi * fhi};
    lo = *std::min_element(cands, cands + 4);
    hi = *std::max_element(cands, cands + 4);
  }
  return lo;
}

// ---- oracles ----------------------------------------------------------------

bool has_kernel_oracle(const ManifoldConfig& cfg) {
  return cfg.variant != Variant::coupled_circle;
}

KernelField sphere_oracle(const FlowTrajectory& traj, const std::array<int, 3>& y, double s,
                          double t, const KernelParams& kp) {
  const ManifoldConfig& cfg = traj.manifold();
  if (!cfg.is_sphere()) fail(Errc::unsupported_variant, "sphere_oracle");
  check_times(traj, s, t);
  double T = traj.inv_coef_integral(0, s, t);
  double cs = sphere_c_at(traj, s);
  KernelField kf;
  kf.solver = KernelSolver::spectral_oracle;
  kf.source = y;
  kf.source_time = s;
  kf.field_time = t;
  kf.factors = 1;
  kf.profile[0] = sphere_heat_profile(cfg.dimension, T, cos_grid(cfg), kp.oracle_tail_tol, -1) /
                  std::pow(cs, 0.5 * cfg.dimension);
  return kf;
}

KernelField theta_oracle(const FlowTrajectory& traj, const std::array<int, 3>& y, double s,
                         double t, const KernelParams& kp) {
  const ManifoldConfig& cfg = traj.manifold();
  if (cfg.variant != Variant::torus_linear) fail(Errc::unsupported_variant, "theta_oracle");
  check_times(traj, s, t);
  GeometryState st_s = traj.state_at(s);
  KernelField kf;
  kf.solver = KernelSolver::spectral_oracle;
  kf.source = y;
  kf.source_time = s;
  kf.field_time = t;
  kf.factors = 3;
  int n = cfg.grid;
  for (int f = 0; f < 3; ++f) {
    double L = cfg.torus_lengths[f];
    double T = traj.inv_coef_integral(f, s, t);
    double norm = 1.0 / std::sqrt(st_s.metric[f]);
    double h = L / n;
    Vec p(n);
    for (int i = 0; i < n; ++i)
      p[i] = norm * wrapped_heat_1d((i - y[f]) * h, T, L, kp.oracle_tail_tol);
    kf.profile[f] = p;
  }
  return kf;
}

KernelField oracle_kernel(const FlowTrajectory& traj, const std::array<int, 3>& y, double s,
                          double t, const KernelParams& kp) {
  const ManifoldConfig& cfg = traj.manifold();
  if (cfg.is_sphere()) return sphere_oracle(traj, y, s, t, kp);
  if (cfg.variant == Variant::torus_linear) return theta_oracle(traj, y, s, t, kp);
  fail(Errc::unsupported_variant, "no closed-form kernel for the coupled variant");
}

KernelField conjugate_oracle(const FlowTrajectory& traj, const std::array<int, 3>& x, double t,
                             double field_time, const KernelParams& kp) {
  const ManifoldConfig& cfg = traj.manifold();
  if (!has_kernel_oracle(cfg))
    fail(Errc::unsupported_variant, "no closed-form conjugate kernel for the coupled variant");
  check_times(traj, field_time, t);
  double damp = std::exp(-traj.mean_S_integral(field_time, t));
  GeometryState st_t = traj.state_at(t);
  KernelField kf;
  kf.solver = KernelSolver::spectral_oracle;
  kf.conjugate = true;
  kf.source = x;
  kf.source_time = t;
  kf.field_time = field_time;
  if (cfg.is_sphere()) {
    kf.factors = 1;
    double T = traj.inv_coef_integral(0, field_time, t);
    kf.profile[0] = sphere_heat_profile(cfg.dimension, T, cos_grid(cfg), kp.oracle_tail_tol, -1) *
                    (damp / std::pow(st_t.metric[0], 0.5 * cfg.dimension));
    return kf;
  }
  kf.factors = 3;
  int n = cfg.grid;
  for (int f = 0; f < 3; ++f) {
    double L = cfg.torus_lengths[f];
    double T = traj.inv_coef_integral(f, field_time, t);
    double norm = 1.0 / std::sqrt(st_t.metric[f]);
    if (f == 0) norm *= damp;
    double h = L / n;
    Vec p(n);
    for (int i = 0; i < n; ++i)
      p[i] = norm * wrapped_heat_1d((i - x[f]) * h, T, L, kp.oracle_tail_tol);
    kf.profile[f] = p;
  }
  return kf;
}

// ---- PDE solvers -----------------------------------------------------------

ForwardKernelResult forward_solve(const FlowTrajectory& traj, const std::array<int, 3>& y,
                                  double s, double t, const KernelParams& kp,
                                  double capture_time) {
  const ManifoldConfig& cfg = traj.manifold();
  check_times(traj, s, t);
  if (!(s < capture_time && capture_time < t))
    fail(Errc::bad_time_order, "capture time must lie strictly between s and t");
  int n = cfg.grid;
  double total = t - s;

  ForwardKernelResult res;
  auto stamp = [&](KernelField& kf, double field_time) {
    kf.solver = KernelSolver::forward_pde;
    kf.source = y;
    kf.source_time = s;
    kf.field_time = field_time;
    kf.factors = factor_count(cfg);
  };
  stamp(res.at_end, t);
  stamp(res.at_capture, capture_time);

  if (has_kernel_oracle(cfg)) {
    double eps = kp.mollify_eps_factor * total;
    double s_eff = s + eps;
    if (capture_time <= s_eff) fail(Errc::bad_time_order, "capture time inside mollification");
    if (cfg.is_sphere()) {
      double T0 = traj.inv_coef_integral(0, s, s_eff);
      Vec u = sphere_heat_profile(cfg.dimension, T0, cos_grid(cfg), kp.oracle_tail_tol,
                                  init_band_cap_sphere(n)) /
              std::pow(sphere_c_at(traj, s), 0.5 * cfg.dimension);
      Mat L = factor_base_matrix(cfg, 0);
      double T1 = traj.inv_coef_integral(0, s_eff, capture_time);
      cn_evolve_const(L, u, T1, cn_steps_scalar(traj, kp, 0, s_eff, capture_time, T1, total));
      res.at_capture.profile[0] = u;
      double T2 = traj.inv_coef_integral(0, capture_time, t);
      cn_evolve_const(L, u, T2, cn_steps_scalar(traj, kp, 0, capture_time, t, T2, total));
      res.at_end.profile[0] = u;
      return res;
    }
    GeometryState st_s = traj.state_at(s);
    for (int f = 0; f < 3; ++f) {
      double L_f = cfg.torus_lengths[f];
      double T0 = traj.inv_coef_integral(f, s, s_eff);
      Vec u = banded_circle_profile(n, L_f, y[f], T0, init_band_cap_circle(n)) /
              std::sqrt(st_s.metric[f]);
      Mat L = factor_base_matrix(cfg, f);
      double T1 = traj.inv_coef_integral(f, s_eff, capture_time);
      cn_evolve_const(L, u, T1, cn_steps_scalar(traj, kp, f, s_eff, capture_time, T1, total));
      res.at_capture.profile[f] = u;
      double T2 = traj.inv_coef_integral(f, capture_time, t);
      cn_evolve_const(L, u, T2, cn_steps_scalar(traj, kp, f, capture_time, t, T2, total));
      res.at_end.profile[f] = u;
    }
    return res;
  }

  // coupled variant: normalized discrete delta, Nyquist band removed so the
  // spectral first-derivative operator sees no null content
  GeometryState st_s = traj.state_at(s);
  for (int f = 0; f < 3; ++f) {
    Vec w = factor_weights(cfg, st_s, f);
    Vec u = Vec::Zero(n);
    u[y[f]] = 1.0 / w[y[f]];
    u = filter_nyquist_band(u);
    if (f == 0) {
      cn_evolve_coupled_forward(traj, u, s, capture_time,
                                cn_steps(kp, capture_time - s, total));
      res.at_capture.profile[f] = u;
      cn_evolve_coupled_forward(traj, u, capture_time, t, cn_steps(kp, t - capture_time, total));
      res.at_end.profile[f] = u;
    } else {
      Mat L = factor_base_matrix(cfg, f);
      double T1 = capture_time - s;
      cn_evolve_const(L, u, T1, cn_steps(kp, T1, total));
      res.at_capture.profile[f] = u;
      double T2 = t - capture_time;
      cn_evolve_const(L, u, T2, cn_steps(kp, T2, total));
      res.at_end.profile[f] = u;
    }
  }
  return res;
}

ConjugateKernelResult conjugate_solve(const FlowTrajectory& traj, const std::array<int, 3>& x,
                                      double t, double s, const KernelParams& kp,
                                      double capture_time) {
  const ManifoldConfig& cfg = traj.manifold();
  check_times(traj, s, t);
  if (!(s < capture_time && capture_time < t))
    fail(Errc::bad_time_order, "capture time must lie strictly between s and t");
  int n = cfg.grid;
  double total = t - s;

  ConjugateKernelResult res;
  auto stamp = [&](KernelField& kf, double field_time) {
    kf.solver = KernelSolver::forward_pde;
    kf.conjugate = true;
    kf.source = x;
    kf.source_time = t;
    kf.field_time = field_time;
    kf.factors = factor_count(cfg);
  };
  stamp(res.at_end, s);
  stamp(res.at_capture, capture_time);

  if (traj.spatially_constant_S()) {
    // remove the reaction term with the exact integrating factor; what is
    // stepped is a pure heat solution in backward effective time
    double eps = kp.mollify_eps_factor * total;
    double tau0 = t - eps;
    if (capture_time >= tau0) fail(Errc::bad_time_order, "capture time inside mollification");
    double damp_capture = std::exp(-traj.mean_S_integral(capture_time, t));
    double damp_end = std::exp(-traj.mean_S_integral(s, t));
    GeometryState st_t = traj.state_at(t);
    if (cfg.is_sphere()) {
      double T0 = traj.inv_coef_integral(0, tau0, t);
      Vec v = sphere_heat_profile(cfg.dimension, T0, cos_grid(cfg), kp.oracle_tail_tol,
                                  init_band_cap_sphere(n)) /
              std::pow(st_t.metric[0], 0.5 * cfg.dimension);
      Mat L = factor_base_matrix(cfg, 0);
      double T1 = traj.inv_coef_integral(0, capture_time, tau0);
      cn_evolve_const(L, v, T1, cn_steps_scalar(traj, kp, 0, capture_time, tau0, T1, total));
      res.at_capture.profile[0] = damp_capture * v;
      double T2 = traj.inv_coef_integral(0, s, capture_time);
      cn_evolve_const(L, v, T2, cn_steps_scalar(traj, kp, 0, s, capture_time, T2, total));
      res.at_end.profile[0] = damp_end * v;
      return res;
    }
    for (int f = 0; f < 3; ++f) {
      double L_f = cfg.torus_lengths[f];
      double T0 = traj.inv_coef_integral(f, tau0, t);
      Vec v = banded_circle_profile(n, L_f, x[f], T0, init_band_cap_circle(n)) /
              std::sqrt(st_t.metric[f]);
      Mat L = factor_base_matrix(cfg, f);
      double T1 = traj.inv_coef_integral(f, capture_time, tau0);
      cn_evolve_const(L, v, T1, cn_steps_scalar(traj, kp, f, capture_time, tau0, T1, total));
      res.at_capture.profile[f] = (f == 0) ? Vec(damp_capture * v) : v;
      double T2 = traj.inv_coef_integral(f, s, capture_time);
      cn_evolve_const(L, v, T2, cn_steps_scalar(traj, kp, f, s, capture_time, T2, total));
      res.at_end.profile[f] = (f == 0) ? Vec(damp_end * v) : v;
    }
    return res;
  }

  // coupled variant: potential kept inside the stepping matrix on the x1
  // factor; flat factors are plain heat
  GeometryState st_t = traj.state_at(t);
  for (int f = 0; f < 3; ++f) {
    Vec w = factor_weights(cfg, st_t, f);
    Vec u = Vec::Zero(n);
    u[x[f]] = 1.0 / w[x[f]];
    u = filter_nyquist_band(u);
    if (f == 0) {
      cn_evolve_coupled_conjugate(traj, u, t, capture_time,
                                  cn_steps(kp, t - capture_time, total));
      res.at_capture.profile[f] = u;
      cn_evolve_coupled_conjugate(traj, u, capture_time, s,
                                  cn_steps(kp, capture_time - s, total));
      res.at_end.profile[f] = u;
    } else {
      Mat L = factor_base_matrix(cfg, f);
      double T1 = t - capture_time;
      cn_evolve_const(L, u, T1, cn_steps(kp, T1, total));
      res.at_capture.profile[f] = u;
      double T2 = capture_time - s;
      cn_evolve_const(L, u, T2, cn_steps(kp, T2, total));
      res.at_end.profile[f] = u;
    }
  }
  return res;
}

// ---- integrals and comparisons ----------------------------------------------

double kernel_mass(const FlowTrajectory& traj, const KernelField& field) {
  const ManifoldConfig& cfg = traj.manifold();
  GeometryState st = traj.state_at(field.field_time);
  double m = 1.0;
  for (int f = 0; f < field.factors; ++f)
    m *= factor_weights(cfg, st, f).dot(field.profile[f]);
  return m;
}

double kernel_mass_sq(const FlowTrajectory& traj, const KernelField& field) {
  const ManifoldConfig& cfg = traj.manifold();
  GeometryState st = traj.state_at(field.field_time);
  double m = 1.0;
  for (int f = 0; f < field.factors; ++f)
    m *= factor_weights(cfg, st, f).dot(field.profile[f].cwiseAbs2());
  return m;
}

double pair_fields(const FlowTrajectory& traj, const KernelField& a, const KernelField& b,
                   double cos_gamma) {
  const ManifoldConfig& cfg = traj.manifold();
  if (std::abs(a.field_time - b.field_time) > 1e-10 * std::max(1.0, traj.t_end()))
    fail(Errc::bad_time_order, "paired fields must live on the same time slice");
  GeometryState st = traj.state_at(a.field_time);
  if (!cfg.is_sphere()) {
    double m = 1.0;
    for (int f = 0; f < a.factors; ++f)
      m *= factor_weights(cfg, st, f).cwiseProduct(a.profile[f]).dot(b.profile[f]);
    return m;
  }
  // different poles: expand both in zonal harmonics and contract with the
  // addition theorem at the pole separation angle
  int n = cfg.grid;
  int dim = cfg.dimension;
  Vec w = measure_weights(cfg, st);
  Mat table = zonal_table(dim, n - 1, cos_grid(cfg));
  Vec fa = table * w.cwiseProduct(a.profile[0]);
  Vec fb = table * w.cwiseProduct(b.profile[0]);
  Vec zg = zonal_table(dim, n - 1, Vec::Constant(1, cos_gamma)).col(0);
  double omega_n = sphere_surface_area(dim);
  double acc = 0.0;
  for (int k = 0; k < n; ++k)
    acc += fa[k] * fb[k] * (zonal_multiplicity(dim, k) / omega_n) * zg[k];
  return acc / std::pow(st.metric[0], 0.5 * dim);
}

double compare_linf(const KernelField& a, const KernelField& b) {
  if (a.factors != b.factors) fail(Errc::bad_config, "mismatched kernel factor structure");
  double max_diff = 0.0;
  double max_ref = 0.0;
  if (a.factors == 1) {
    for (int i = 0; i < a.profile[0].size(); ++i) {
      max_diff = std::max(max_diff, std::abs(a.profile[0][i] - b.profile[0][i]));
      max_ref = std::max(max_ref, std::abs(b.profile[0][i]));
    }
  } else {
    int n0 = static_cast<int>(a.profile[0].size());
    int n1 = static_cast<int>(a.profile[1].size());
    int n2 = static_cast<int>(a.profile[2].size());
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j) {
        double aij = a.profile[0][i] * a.profile[1][j];
        double bij = b.profile[0][i] * b.profile[1][j];
        for (int k = 0; k < n2; ++k) {
          double av = aij * a.profile[2][k];
          double bv = bij * b.profile[2][k];
          max_diff = std::max(max_diff, std::abs(av - bv));
          max_ref = std::max(max_ref, std::abs(bv));
        }
      }
  }
  if (max_ref == 0.0) fail(Errc::denominator_zero, "reference field is identically zero");
  return max_diff / max_ref;
}

double sphere_sample_cos_gamma(const ManifoldConfig& cfg, const std::array<int, 3>& x) {
  return std::cos((x[0] + 0.5) * kPi / cfg.grid);
}

KernelDiagnostics kernel_diagnostics(const FlowTrajectory& traj, const std::array<int, 3>& x,
                                     const std::array<int, 3>& y, double s, double t,
                                     const KernelParams& kp) {
  const ManifoldConfig& cfg = traj.manifold();
  double mid = 0.5 * (s + t);
  ForwardKernelResult fwd = forward_solve(traj, y, s, t, kp, mid);
  ConjugateKernelResult conj = conjugate_solve(traj, x, t, s, kp, mid);
  KernelDiagnostics d;
  d.mid_time = mid;
  if (cfg.is_sphere()) {
    d.G_fwd = fwd.at_end.profile[0][x[0]];
    d.G_conj = conj.at_end.profile[0][x[0]];
    d.semigroup = pair_fields(traj, fwd.at_capture, conj.at_capture,
                              sphere_sample_cos_gamma(cfg, x));
  } else {
    d.G_fwd = fwd.at_end.value_at(x);
    d.G_conj = conj.at_end.value_at(y);
    d.semigroup = pair_fields(traj, fwd.at_capture, conj.at_capture, 1.0);
  }
  d.J_t = kernel_mass(traj, fwd.at_end);
  d.Jtilde_s = kernel_mass(traj, conj.at_end);
  d.P_mid = kernel_mass_sq(traj, fwd.at_capture);
  d.Q_mid = kernel_mass_sq(traj, conj.at_capture);
  d.semigroup_residual = std::abs(d.semigroup - d.G_fwd) / std::max(std::abs(d.G_fwd), 1e-300);
  return d;
}

double semigroup_check(const FlowTrajectory& traj, const std::array<int, 3>& x,
                       const std::array<int, 3>& y, double s, double t, double m,
                       const KernelParams& kp, bool use_oracle) {
  const ManifoldConfig& cfg = traj.manifold();
  if (!(s < m && m < t)) fail(Errc::bad_time_order, "intermediate time must satisfy s < m < t");
  double cg = cfg.is_sphere() ? sphere_sample_cos_gamma(cfg, x) : 1.0;
  if (use_oracle) {
    if (!has_kernel_oracle(cfg))
      fail(Errc::unsupported_variant, "oracle semigroup check needs a closed form");
    KernelField fwd_m = oracle_kernel(traj, y, s, m, kp);
    KernelField conj_m = conjugate_oracle(traj, x, t, m, kp);
    KernelField ref = oracle_kernel(traj, y, s, t, kp);
    double g = cfg.is_sphere() ? ref.profile[0][x[0]] : ref.value_at(x);
    double sg = pair_fields(traj, fwd_m, conj_m, cg);
    return std::abs(sg - g) / std::max(std::abs(g), 1e-300);
  }
  ForwardKernelResult fwd = forward_solve(traj, y, s, t, kp, m);
  ConjugateKernelResult conj = conjugate_solve(traj, x, t, s, kp, m);
  double g = cfg.is_sphere() ? fwd.at_end.profile[0][x[0]] : fwd.at_end.value_at(x);
  double sg = pair_fields(traj, fwd.at_capture, conj.at_capture, cg);
  return std::abs(sg - g) / std::max(std::abs(g), 1e-300);
}

}  // namespace rhflow
