#pragma once

#include <array>
#include <vector>

#include "core/config.hpp"
#include "core/flow.hpp"
#include "core/heatkernel.hpp"
#include "core/quadrature.hpp"
#include "core/sobolev.hpp"

namespace rhflow {

// Inputs of the on-diagonal comparison machinery. m0 is the reciprocal of the
// initial reaction infimum; when that infimum is >= 0 the lower bound and the
// volume ratio collapse to 0 and 1 and m0 is never used as a denominator.
struct ComparisonInputs {
  int dimension = 3;
  double m0 = 0.0;
  bool nonneg_case = false;      // inf S(., 0) >= 0
  bool strict_positive = false;  // inf S(., 0) > 0 (decay bound applies)
  SobolevConstants sobolev;
  QuadratureOptions quad;
};

ComparisonInputs make_comparison_inputs(const FlowTrajectory& traj, const SobolevConstants& sob);

// c_n = 2/n and the front constant (2/n)^{n/2} of the kernel bound
double reaction_slope(int n);
double front_constant(int n);

// maximum-principle floor of S at time tau: 1/(m0 - c_n tau), or 0 on the
// nonnegative branch
double s_lower_bound(const ComparisonInputs& in, double tau);

// volume-ratio factor chi_{t,s} = (m0 - c_n t)/(m0 - c_n s), 1 on the
// nonnegative branch
double chi_factor(const ComparisonInputs& in, double t, double s);

// H(tau) = integral_s^tau (B/A - (3/4) s_lower) du
double H_integral(const ComparisonInputs& in, double s, double tau);

struct TheoremPieces {
  double mid = 0.0;
  double I1 = 0.0;      // integral over [s, mid] of chi^{-2} e^{2H/n} / A
  double I2 = 0.0;      // integral over [mid, t] of e^{-2H/n} / A
  double H_mid = 0.0;
  double chi_mid = 0.0;  // chi_{mid, s}
  double p_bound = 0.0;  // bound on the squared forward mass at mid
  double q_bound = 0.0;  // bound on the squared conjugate mass at mid
  double bound = 0.0;    // sqrt(p_bound * q_bound)
};

TheoremPieces theorem_pieces(const ComparisonInputs& in, double s, double t);
double theorem_bound(const ComparisonInputs& in, double s, double t);

// decay constant (4 Kc / n)^{n/2} for Kc = K or K^2 depending on convention
double corollary_constant(int n, double K, AConvention conv);

// (t-s)^{-n/2} decay bound; only defined when S(., 0) > 0 everywhere
double corollary_bound(const ComparisonInputs& in, double s, double t);

struct VerifyTolerances {
  double ratio_floor = 1.0;          // bound/actual must not fall below this
  double mass_slack = 1e-6;          // J(t) <= chi^{n/2} + slack
  double conj_mass_tol = 1e-6;       // |Jtilde - 1| for spectrally solved models
  double conj_mass_tol_pde = 1e-3;   // same for the coupled PDE model
  double chain_rel = 1e-6;           // G <= sqrt(P Q) within this relative slack
  double pq_rel = 1e-2;              // P <= p_bound, Q <= q_bound relative slack
  double s_floor_slack = 1e-6;       // min S >= lower bound - slack at checkpoints
};

struct BoundRow {
  std::array<int, 3> x{0, 0, 0};
  std::array<int, 3> y{0, 0, 0};
  double s = 0.0, t = 0.0;
  double g_actual = 0.0;
  double bound_theorem = 0.0;
  double bound_corollary = 0.0;  // NaN when the decay bound does not apply
  double ratio_theorem = 0.0;
  double ratio_corollary = 0.0;  // NaN when the decay bound does not apply
  double m0 = 0.0;
  double chi_mid = 0.0;
  double h_mid = 0.0;
  double j_t = 0.0;
  double jtilde_s = 0.0;
  double p_mid = 0.0;
  double q_mid = 0.0;
  bool pass = false;
};

struct BoundReport {
  Variant variant = Variant::round_sphere;
  int dimension = 3;
  double m0 = 0.0;
  bool nonneg_case = false;
  bool strict_positive = false;
  double c_n = 0.0;
  double front = 0.0;             // (2/n)^{n/2}
  double corollary_plain = 0.0;   // (4K/n)^{n/2}
  double corollary_squared = 0.0; // (4K^2/n)^{n/2}
  SobolevConstants sobolev;
  std::vector<BoundRow> rows;
  bool s_floor_ok = true;
  double s_floor_worst = 0.0;  // most negative margin min_S - lower bound
  bool all_pass = false;
};

// Runs the kernel diagnostics and the bound formulas on every sample and
// checks the flow-wide maximum-principle floor at the stored checkpoints.
BoundReport verify_bounds(const FlowTrajectory& traj, const SobolevConstants& sob,
                          const std::vector<Sample>& samples, const KernelParams& kp,
                          const VerifyTolerances& tol = {});

}  // namespace rhflow
