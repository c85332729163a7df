#include "core/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/common.hpp"

namespace rhflow {

namespace {

constexpr double kDenomFloor = 1e-12;

double guarded_denominator(double m0, double cn, double tau) {
  double d = m0 - cn * tau;
  if (std::abs(d) < kDenomFloor)
    fail(Errc::denominator_zero,
         strprintf("m0 - c_n tau vanished at tau = %.17g (m0 = %.17g)", tau, m0));
  return d;
}

// inner tolerance for H when it feeds an outer adaptive integral; the outer
// integrand must be smooth well below the outer tolerance or the refinement
// chases quadrature noise
QuadratureOptions inner_options(const QuadratureOptions& outer) {
  QuadratureOptions q = outer;
  q.abs_tol = std::max(1e-13, outer.abs_tol * 1e-4);
  return q;
}

}  // namespace

ComparisonInputs make_comparison_inputs(const FlowTrajectory& traj, const SobolevConstants& sob) {
  ComparisonInputs in;
  in.dimension = traj.manifold().dimension;
  const double s0 = traj.inf_S0();
  in.nonneg_case = s0 >= 0.0;
  in.strict_positive = s0 > 0.0;
  in.m0 = (s0 != 0.0) ? 1.0 / s0 : 0.0;
  in.sobolev = sob;
  return in;
}

double reaction_slope(int n) { return 2.0 / n; }

double front_constant(int n) { return std::pow(2.0 / n, 0.5 * n); }

double s_lower_bound(const ComparisonInputs& in, double tau) {
  if (in.nonneg_case) return 0.0;
  return 1.0 / guarded_denominator(in.m0, reaction_slope(in.dimension), tau);
}

double chi_factor(const ComparisonInputs& in, double t, double s) {
  if (in.nonneg_case) return 1.0;
  const double cn = reaction_slope(in.dimension);
  return guarded_denominator(in.m0, cn, t) / guarded_denominator(in.m0, cn, s);
}

double H_integral(const ComparisonInputs& in, double s, double tau) {
  if (tau == s) return 0.0;
  auto f = [&](double u) {
    return in.sobolev.B_at(u) / in.sobolev.A_at(u) - 0.75 * s_lower_bound(in, u);
  };
  return adaptive_simpson(f, s, tau, in.quad);
}

TheoremPieces theorem_pieces(const ComparisonInputs& in, double s, double t) {
  if (!(s < t)) fail(Errc::bad_time_order, "theorem bound needs s < t");
  TheoremPieces out;
  out.mid = 0.5 * (s + t);
  const double n = in.dimension;
  const QuadratureOptions hq = inner_options(in.quad);

  auto H_at = [&](double tau) {
    if (tau == s) return 0.0;
    auto f = [&](double u) {
      return in.sobolev.B_at(u) / in.sobolev.A_at(u) - 0.75 * s_lower_bound(in, u);
    };
    return adaptive_simpson(f, s, tau, hq);
  };

  out.H_mid = H_integral(in, s, out.mid);
  out.chi_mid = chi_factor(in, out.mid, s);

  auto i1_f = [&](double tau) {
    double chi = chi_factor(in, tau, s);
    return std::exp(2.0 / n * H_at(tau)) / (chi * chi * in.sobolev.A_at(tau));
  };
  auto i2_f = [&](double tau) {
    return std::exp(-2.0 / n * H_at(tau)) / in.sobolev.A_at(tau);
  };
  out.I1 = adaptive_simpson(i1_f, s, out.mid, in.quad);
  out.I2 = adaptive_simpson(i2_f, out.mid, t, in.quad);
  if (!(out.I1 > 0.0) || !(out.I2 > 0.0))
    fail(Errc::nonpositive_integral,
         strprintf("bound integrals must be positive, got I1 = %.17g, I2 = %.17g", out.I1, out.I2));

  const double front = front_constant(in.dimension);
  out.p_bound = front * std::exp(out.H_mid) / std::pow(out.I1, 0.5 * n);
  out.q_bound = front * std::exp(-out.H_mid) / std::pow(out.I2, 0.5 * n);
  out.bound = std::sqrt(out.p_bound * out.q_bound);
  return out;
}

double theorem_bound(const ComparisonInputs& in, double s, double t) {
  return theorem_pieces(in, s, t).bound;
}

double corollary_constant(int n, double K, AConvention conv) {
  const double kc = (conv == AConvention::squared) ? K * K : K;
  return std::pow(4.0 * kc / n, 0.5 * n);
}

double corollary_bound(const ComparisonInputs& in, double s, double t) {
  if (!in.strict_positive)
    fail(Errc::not_positive_case, "decay bound requires S(., 0) > 0 everywhere");
  if (!(s < t)) fail(Errc::bad_time_order, "decay bound needs s < t");
  const double c = corollary_constant(in.dimension, in.sobolev.K, AConvention::plain);
  return c * std::pow(t - s, -0.5 * in.dimension);
}

BoundReport verify_bounds(const FlowTrajectory& traj, const SobolevConstants& sob,
                          const std::vector<Sample>& samples, const KernelParams& kp,
                          const VerifyTolerances& tol) {
  const ManifoldConfig& cfg = traj.manifold();
  const ComparisonInputs in = make_comparison_inputs(traj, sob);
  const double n = cfg.dimension;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  BoundReport rep;
  rep.variant = cfg.variant;
  rep.dimension = cfg.dimension;
  rep.m0 = in.m0;
  rep.nonneg_case = in.nonneg_case;
  rep.strict_positive = in.strict_positive;
  rep.c_n = reaction_slope(cfg.dimension);
  rep.front = front_constant(cfg.dimension);
  rep.corollary_plain = corollary_constant(cfg.dimension, sob.K, AConvention::plain);
  rep.corollary_squared = corollary_constant(cfg.dimension, sob.K, AConvention::squared);
  rep.sobolev = sob;

  rep.s_floor_worst = std::numeric_limits<double>::infinity();
  for (const FlowCheckpoint& cp : traj.checkpoints()) {
    double margin = cp.min_s - s_lower_bound(in, cp.t);
    rep.s_floor_worst = std::min(rep.s_floor_worst, margin);
  }
  rep.s_floor_ok = rep.s_floor_worst >= -tol.s_floor_slack;

  const bool pde_mass = cfg.variant == Variant::coupled_circle;
  const double jtilde_tol = pde_mass ? tol.conj_mass_tol_pde : tol.conj_mass_tol;

  bool all = rep.s_floor_ok;
  for (const Sample& sm : samples) {
    BoundRow row;
    row.x = sm.x;
    row.y = sm.y;
    row.s = sm.s;
    row.t = sm.t;
    row.m0 = in.m0;

    const KernelDiagnostics kd = kernel_diagnostics(traj, sm.x, sm.y, sm.s, sm.t, kp);
    const TheoremPieces pc = theorem_pieces(in, sm.s, sm.t);

    row.g_actual = kd.G_fwd;
    row.bound_theorem = pc.bound;
    row.chi_mid = pc.chi_mid;
    row.h_mid = pc.H_mid;
    row.j_t = kd.J_t;
    row.jtilde_s = kd.Jtilde_s;
    row.p_mid = kd.P_mid;
    row.q_mid = kd.Q_mid;
    row.ratio_theorem = (row.g_actual > 0.0) ? row.bound_theorem / row.g_actual
                                             : std::numeric_limits<double>::infinity();

    if (in.strict_positive) {
      row.bound_corollary = corollary_bound(in, sm.s, sm.t);
      row.ratio_corollary = (row.g_actual > 0.0) ? row.bound_corollary / row.g_actual
                                                 : std::numeric_limits<double>::infinity();
    } else {
      row.bound_corollary = nan;
      row.ratio_corollary = nan;
    }

    const double chi_ts = chi_factor(in, sm.t, sm.s);
    bool ok = row.ratio_theorem >= tol.ratio_floor;
    ok = ok && row.g_actual <= std::sqrt(kd.P_mid * kd.Q_mid) * (1.0 + tol.chain_rel) + 1e-300;
    ok = ok && row.j_t <= std::pow(chi_ts, 0.5 * n) + tol.mass_slack;
    ok = ok && std::abs(row.jtilde_s - 1.0) <= jtilde_tol;
    ok = ok && kd.P_mid <= pc.p_bound * (1.0 + tol.pq_rel);
    ok = ok && kd.Q_mid <= pc.q_bound * (1.0 + tol.pq_rel);
    if (in.strict_positive) {
      // the tighter squared-convention constant implies the plain one
      double decay_sq = rep.corollary_squared * std::pow(sm.t - sm.s, -0.5 * n);
      ok = ok && row.g_actual <= decay_sq;
    }
    row.pass = ok;
    all = all && ok;
    rep.rows.push_back(row);
  }
  rep.all_pass = all && !samples.empty();
  return rep;
}

}  // namespace rhflow
