// Comparison-machinery checks: branch formulas for the reaction floor and the
// volume ratio, closed forms for the reaction integral and the two bound
// integrals, decay scaling in the positive case, report assembly, and the
// failure path for an inadmissible coefficient override.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "core/bounds.hpp"
#include "core/common.hpp"
#include "core/flow.hpp"
#include "core/sobolev.hpp"
#include "support.hpp"

using namespace rhflow;
using doctest::Approx;
using testsupport::quick_flow;
using testsupport::quick_kernel;

namespace {

Errc thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

// inputs with constant coefficient curves, bypassing estimation
ComparisonInputs direct_inputs(double m0, bool nonneg, bool strict, double a, double b) {
  ComparisonInputs in;
  in.dimension = 3;
  in.m0 = m0;
  in.nonneg_case = nonneg;
  in.strict_positive = strict;
  in.sobolev.K = talenti_constant(3);
  in.sobolev.positive_case = strict;
  in.sobolev.times = {0.0, 1.0};
  in.sobolev.A_curve = {a, a};
  in.sobolev.B_curve = {b, b};
  return in;
}

}  // namespace

TEST_CASE("dimension constants") {
  CHECK(reaction_slope(3) == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(reaction_slope(4) == Approx(0.5).epsilon(1e-15));
  CHECK(front_constant(3) == Approx(std::pow(2.0 / 3.0, 1.5)).epsilon(1e-15));
  CHECK(front_constant(4) == Approx(0.25).epsilon(1e-15));
  CHECK(front_constant(6) == Approx(1.0 / 27.0).epsilon(1e-15));
}

TEST_CASE("reaction floor and volume ratio branches") {
  // negative infimum: floor 1/(m0 - c_n tau) rises toward zero, ratio grows
  ComparisonInputs neg = direct_inputs(-1.0, false, false, 0.5, 0.0);
  CHECK(s_lower_bound(neg, 0.0) == Approx(-1.0).epsilon(1e-15));
  CHECK(s_lower_bound(neg, 0.6) == Approx(-1.0 / 1.4).epsilon(1e-15));
  CHECK(s_lower_bound(neg, 0.6) > s_lower_bound(neg, 0.0));
  CHECK(chi_factor(neg, 0.6, 0.0) == Approx(1.4).epsilon(1e-15));
  CHECK(chi_factor(neg, 0.25, 0.25) == Approx(1.0).epsilon(1e-15));
  CHECK(chi_factor(neg, 0.9, 0.0) > chi_factor(neg, 0.6, 0.0));

  // nonnegative infimum: floor and ratio collapse to the trivial branch
  ComparisonInputs pos = direct_inputs(1.0 / 3.0, true, true, 0.5, 0.0);
  for (double tau : {0.0, 0.3, 2.0}) CHECK(s_lower_bound(pos, tau) == 0.0);
  CHECK(chi_factor(pos, 0.9, 0.1) == 1.0);
}

TEST_CASE("reaction integral closed form") {
  // B/A constant and floor integrable in closed form:
  // H(tau) = (B/A)(tau - s) + (0.75 / c_n) log chi_{tau,s}
  ComparisonInputs in = direct_inputs(-1.0, false, false, 0.5, 0.2);
  const double s = 0.1;
  CHECK(H_integral(in, s, s) == 0.0);
  for (double tau : {0.3, 0.9}) {
    double closed = (0.2 / 0.5) * (tau - s) + 1.125 * std::log(chi_factor(in, tau, s));
    CHECK(H_integral(in, s, tau) == Approx(closed).epsilon(1e-10));
  }

  // trivial branch drops the floor term entirely
  ComparisonInputs pos = direct_inputs(0.0, true, false, 0.5, 0.2);
  CHECK(H_integral(pos, 0.0, 0.75) == Approx(0.4 * 0.75).epsilon(1e-13));
}

TEST_CASE("positive case bound decays at the fixed power") {
  const double a = 0.3;
  ComparisonInputs in = direct_inputs(0.0, true, true, a, 0.0);
  const double scale = std::pow(4.0 * a / 3.0, 1.5);
  for (auto [s, dt] : {std::pair{0.0, 0.1}, {0.2, 0.05}, {0.5, 0.3}, {0.01, 0.8}}) {
    TheoremPieces pc = theorem_pieces(in, s, s + dt);
    CHECK(pc.I1 == Approx(0.5 * dt / a).epsilon(1e-12));
    CHECK(pc.I2 == Approx(0.5 * dt / a).epsilon(1e-12));
    CHECK(pc.H_mid == 0.0);
    CHECK(pc.chi_mid == 1.0);
    CHECK(pc.bound * std::pow(dt, 1.5) == Approx(scale).epsilon(1e-12));
  }

  // with A pinned at K^2 the bound coincides with the squared-convention
  // decay constant, and the plain convention matches its own closed form
  const double k = talenti_constant(3);
  ComparisonInputs tight = direct_inputs(0.0, true, true, k * k, 0.0);
  const double dt = 0.25;
  CHECK(theorem_bound(tight, 0.0, dt) ==
        Approx(corollary_constant(3, k, AConvention::squared) * std::pow(dt, -1.5))
            .epsilon(1e-12));
  CHECK(corollary_bound(tight, 0.0, dt) ==
        Approx(std::pow(4.0 * k / 3.0, 1.5) * std::pow(dt, -1.5)).epsilon(1e-12));
  // K < 1 in three dimensions, so squaring tightens the constant
  CHECK(corollary_constant(3, k, AConvention::squared) <
        corollary_constant(3, k, AConvention::plain));
}

TEST_CASE("negative branch pieces match the power-law reductions") {
  // with B = 0 and constant A the integrands reduce to powers of
  // u(tau) = c_n tau - m0, integrable by hand
  const double a = 0.25, m0 = -1.0, s = 0.1, t = 0.7;
  ComparisonInputs in = direct_inputs(m0, false, false, a, 0.0);
  const double cn = 2.0 / 3.0;
  const double mid = 0.5 * (s + t);
  const double us = cn * s - m0, um = cn * mid - m0, ut = cn * t - m0;

  const double i1 = std::pow(us, 1.25) / (a * cn) * 4.0 *
                    (std::pow(us, -0.25) - std::pow(um, -0.25));
  const double i2 = std::pow(us, 0.75) / (a * cn) * 4.0 *
                    (std::pow(ut, 0.25) - std::pow(um, 0.25));
  const double h_mid = 1.125 * std::log(um / us);
  const double front = std::pow(2.0 / 3.0, 1.5);
  const double p = front * std::exp(h_mid) / std::pow(i1, 1.5);
  const double q = front * std::exp(-h_mid) / std::pow(i2, 1.5);

  TheoremPieces pc = theorem_pieces(in, s, t);
  CHECK(pc.mid == Approx(mid).epsilon(1e-15));
  CHECK(pc.chi_mid == Approx(um / us).epsilon(1e-13));
  CHECK(pc.H_mid == Approx(h_mid).epsilon(1e-9));
  CHECK(pc.I1 == Approx(i1).epsilon(1e-9));
  CHECK(pc.I2 == Approx(i2).epsilon(1e-9));
  CHECK(pc.p_bound == Approx(p).epsilon(1e-9));
  CHECK(pc.q_bound == Approx(q).epsilon(1e-9));
  CHECK(pc.bound == Approx(std::sqrt(p * q)).epsilon(1e-9));
  CHECK(pc.bound == Approx(std::sqrt(pc.p_bound * pc.q_bound)).epsilon(1e-14));
  CHECK(theorem_bound(in, s, t) == Approx(pc.bound).epsilon(1e-14));
}

TEST_CASE("integral refinement is already converged") {
  // piecewise-linear coefficient curves with a kink inside the window; the
  // default tolerance must agree with a hundredfold tighter one
  ComparisonInputs in = direct_inputs(-1.0, false, false, 0.5, 0.2);
  in.sobolev.times = {0.0, 0.5, 1.0};
  in.sobolev.A_curve = {0.5, 0.35, 0.3};
  in.sobolev.B_curve = {0.2, 0.12, 0.1};
  const double b8 = theorem_bound(in, 0.1, 0.9);
  in.quad.abs_tol = 1e-10;
  const double b10 = theorem_bound(in, 0.1, 0.9);
  CHECK(b8 == Approx(b10).epsilon(1e-7));
}

TEST_CASE("comparison inputs read off the trajectory") {
  SobolevConstants sob;
  sob.K = talenti_constant(3);

  FlowTrajectory torus = run_flow(testsupport::torus_manifold(16, 1, 1.0), quick_flow(0.2));
  ComparisonInputs tin = make_comparison_inputs(torus, sob);
  CHECK(tin.dimension == 3);
  CHECK(torus.inf_S0() == Approx(-1.0).epsilon(1e-12));
  CHECK(tin.m0 == Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(tin.nonneg_case);
  CHECK_FALSE(tin.strict_positive);
  CHECK(tin.sobolev.K == sob.K);

  FlowTrajectory sphere = run_flow(testsupport::sphere_manifold(32, 2.0), quick_flow(0.05));
  ComparisonInputs sin_ = make_comparison_inputs(sphere, sob);
  CHECK(sphere.inf_S0() == Approx(3.0).epsilon(1e-12));
  CHECK(sin_.m0 == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(sin_.nonneg_case);
  CHECK(sin_.strict_positive);

  // static circle map: the reaction term vanishes identically
  ManifoldConfig flat = testsupport::coupled_manifold(32, 0.2, 0.0);
  flat.winding = 0;
  FlowTrajectory still = run_flow(flat, quick_flow(0.05));
  ComparisonInputs fin = make_comparison_inputs(still, sob);
  CHECK(still.inf_S0() == 0.0);
  CHECK(fin.m0 == 0.0);
  CHECK(fin.nonneg_case);
  CHECK_FALSE(fin.strict_positive);
}

TEST_CASE("error codes") {
  ComparisonInputs neg = direct_inputs(-1.0, false, false, 0.5, 0.0);
  CHECK(thrown_code([&] { theorem_pieces(neg, 0.2, 0.2); }) == Errc::bad_time_order);
  CHECK(thrown_code([&] { theorem_pieces(neg, 0.3, 0.1); }) == Errc::bad_time_order);
  CHECK(thrown_code([&] { corollary_bound(neg, 0.0, 1.0); }) == Errc::not_positive_case);

  ComparisonInputs pos = direct_inputs(0.0, true, true, 0.5, 0.0);
  CHECK(thrown_code([&] { corollary_bound(pos, 0.2, 0.1); }) == Errc::bad_time_order);

  // denominator m0 - c_n tau crosses zero only when the flags are inconsistent
  // with the sign of m0; the guard still has to refuse cleanly
  ComparisonInputs bad = direct_inputs((2.0 / 3.0) * 0.5, false, false, 0.5, 0.0);
  CHECK(thrown_code([&] { s_lower_bound(bad, 0.5); }) == Errc::denominator_zero);
  CHECK(thrown_code([&] { chi_factor(bad, 0.5, 0.0); }) == Errc::denominator_zero);

  ComparisonInputs flipped = direct_inputs(-1.0, false, false, -1.0, 0.0);
  CHECK(thrown_code([&] { theorem_pieces(flipped, 0.1, 0.5); }) == Errc::nonpositive_integral);
}

TEST_CASE("verification report on the flowing torus") {
  FlowTrajectory traj = run_flow(testsupport::torus_manifold(16, 1, 1.0), quick_flow(0.4));
  SobolevConstants sob = estimate_AB(traj, {0.0, 0.2, 0.4}, SobolevParams{}, 42);
  std::vector<Sample> samples = {{{2, 3, 4}, {1, 2, 3}, 0.05, 0.35},
                                 {{0, 0, 0}, {0, 0, 0}, 0.0, 0.3},
                                 {{1, 0, 2}, {0, 0, 0}, 0.1, 0.4}};
  BoundReport rep = verify_bounds(traj, sob, samples, quick_kernel(400));

  CHECK(rep.variant == Variant::torus_linear);
  CHECK(rep.dimension == 3);
  CHECK(rep.m0 == Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(rep.nonneg_case);
  CHECK_FALSE(rep.strict_positive);
  CHECK(rep.c_n == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rep.front == Approx(std::pow(2.0 / 3.0, 1.5)).epsilon(1e-15));
  CHECK(rep.corollary_plain == Approx(std::pow(4.0 * sob.K / 3.0, 1.5)).epsilon(1e-13));
  CHECK(rep.corollary_squared ==
        Approx(std::pow(4.0 * sob.K * sob.K / 3.0, 1.5)).epsilon(1e-13));

  // the exact reaction term sits on the floor at t = 0 and above it after
  CHECK(rep.s_floor_ok);
  CHECK(rep.s_floor_worst >= -1e-12);

  REQUIRE(rep.rows.size() == samples.size());
  for (const BoundRow& row : rep.rows) {
    CHECK(row.pass);
    CHECK(row.g_actual > 0.0);
    CHECK(row.bound_theorem > row.g_actual);
    CHECK(row.ratio_theorem >= 1.0);
    CHECK(std::isnan(row.bound_corollary));
    CHECK(std::isnan(row.ratio_corollary));
    CHECK(row.chi_mid > 1.0);
    CHECK(row.j_t > 1.0);  // expanding factor, mass grows
    CHECK(row.jtilde_s == Approx(1.0).epsilon(1e-9));
    CHECK(row.p_mid > 0.0);
    CHECK(row.q_mid > 0.0);
  }
  CHECK(rep.all_pass);

  CHECK_FALSE(verify_bounds(traj, sob, {}, quick_kernel(400)).all_pass);
}

TEST_CASE("verification report on the shrinking sphere") {
  FlowTrajectory traj = run_flow(testsupport::sphere_manifold(32, 2.0), quick_flow(0.1));
  SobolevConstants sob = estimate_AB(traj, {0.0, 0.05, 0.1}, SobolevParams{}, 42);
  REQUIRE(sob.positive_case);
  std::vector<Sample> samples = {{{5, 0, 0}, {0, 0, 0}, 0.01, 0.09},
                                 {{0, 0, 0}, {0, 0, 0}, 0.0, 0.1}};
  BoundReport rep = verify_bounds(traj, sob, samples, quick_kernel(400));

  CHECK(rep.nonneg_case);
  CHECK(rep.strict_positive);
  CHECK(rep.m0 == Approx(1.0 / 3.0).epsilon(1e-12));

  REQUIRE(rep.rows.size() == samples.size());
  for (const BoundRow& row : rep.rows) {
    const double dt = row.t - row.s;
    CHECK(row.pass);
    CHECK(row.ratio_theorem >= 1.0);
    // positive case with A = K^2 throughout: the window bound equals the
    // squared-convention decay bound
    CHECK(row.bound_theorem ==
          Approx(rep.corollary_squared * std::pow(dt, -1.5)).epsilon(1e-10));
    CHECK(row.bound_corollary ==
          Approx(rep.corollary_plain * std::pow(dt, -1.5)).epsilon(1e-12));
    CHECK(row.ratio_corollary > 1.0);
    CHECK(row.chi_mid == 1.0);
    CHECK(row.j_t <= 1.0 + 1e-9);  // shrinking sphere loses mass
    CHECK(row.jtilde_s == Approx(1.0).epsilon(1e-9));
  }
  CHECK(rep.all_pass);
}

TEST_CASE("weak coefficient override is flagged") {
  FlowTrajectory traj = run_flow(testsupport::torus_manifold(16, 1, 1.0), quick_flow(0.4));
  SobolevConstants weak;
  weak.K = talenti_constant(3);
  weak.times = {0.0, 1.0};
  weak.A_curve = {1e-4, 1e-4};  // far below any admissible constant
  weak.B_curve = {0.0, 0.0};
  std::vector<Sample> samples = {{{0, 0, 0}, {0, 0, 0}, 0.05, 0.35}};
  BoundReport rep = verify_bounds(traj, weak, samples, quick_kernel(400));

  CHECK(rep.s_floor_ok);
  REQUIRE(rep.rows.size() == 1);
  CHECK_FALSE(rep.rows[0].pass);
  CHECK(rep.rows[0].ratio_theorem < 1.0);
  CHECK_FALSE(rep.all_pass);
}
