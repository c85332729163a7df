// Acceptance gate over the shipped configurations. Eight criteria, one
// [PASS]/[FAIL] line each with the measured numbers; the process exit status
// is the number of failed criteria. Tolerances and time budgets are fixed
// here and are not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core/bounds.hpp"
#include "core/config.hpp"
#include "core/flow.hpp"
#include "core/geometry.hpp"
#include "core/heatkernel.hpp"
#include "core/pipeline.hpp"
#include "core/quadrature.hpp"
#include "core/sobolev.hpp"

using namespace rhflow;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double rel_err(double got, double want) {
  double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string note;
};

// Everything the criteria share: the three shipped configurations, their flow
// trajectories, their verification reports, and the artifact bytes captured
// after the first run (the determinism criterion reruns and compares).
struct GateContext {
  RunConfig sphere, torus, coupled;
  std::shared_ptr<const FlowTrajectory> traj_sphere, traj_torus, traj_coupled;
  VerifyRunResult ver_sphere, ver_torus, ver_coupled;
  double torus_flow_seconds = 0.0;
  double torus_verify_seconds = 0.0;
  std::string torus_traj_path, torus_bounds_path;
  std::string torus_traj_bytes, torus_bounds_bytes;
};

// --- criterion 1: the scalar flow ODEs against their closed forms ----------

double schedule_integral_closed(const CouplingSchedule& c, double t) {
  switch (c.form) {
    case ScheduleForm::constant:
      return c.alpha0 * t;
    case ScheduleForm::linear_floor: {
      double kink = (c.alpha0 - c.floor) / c.rate;
      if (t <= kink) return c.alpha0 * t - 0.5 * c.rate * t * t;
      double at_kink = c.alpha0 * kink - 0.5 * c.rate * kink * kink;
      return at_kink + c.floor * (t - kink);
    }
    case ScheduleForm::exponential:
      // the family decays toward its floor: alpha = floor + (alpha0 - floor) e^{-rate t}
      return c.floor * t + (c.alpha0 - c.floor) * (1.0 - std::exp(-c.rate * t)) / c.rate;
  }
  return 0.0;
}

Outcome criterion_flow_closed_forms(GateContext& cx) {
  Stopwatch sw;
  FlowParams fp;
  fp.t_end = 0.2;
  fp.dt = 1e-3;
  fp.checkpoint_stride = 10;

  double worst = 0.0;

  // shrinking round sphere: conformal factor r0^2 - 2(n-1) t
  {
    FlowTrajectory traj = run_flow(cx.sphere.manifold, fp);
    for (int i = 0; i <= 40; ++i) {
      double t = 0.005 * i;
      double want = cx.sphere.manifold.r2_0 - 4.0 * t;
      worst = std::max(worst, rel_err(traj.state_at(t).metric(0), want));
    }
  }

  // flat torus with a winding-one map: only the mapped coordinate stretches,
  // A(t) = A0 + 2 * integral of alpha, under all three coupling schedules.
  // The linear schedule's clamp lands on a checkpoint time.
  std::vector<CouplingSchedule> schedules(3);
  schedules[0].form = ScheduleForm::constant;
  schedules[0].alpha0 = 1.0;
  schedules[1].form = ScheduleForm::linear_floor;
  schedules[1].alpha0 = 1.0;
  schedules[1].rate = 2.0;
  schedules[1].floor = 0.8;
  schedules[2].form = ScheduleForm::exponential;
  schedules[2].alpha0 = 1.0;
  schedules[2].rate = 0.5;
  schedules[2].floor = 0.5;

  for (const CouplingSchedule& sched : schedules) {
    ManifoldConfig m = cx.torus.manifold;
    m.coupling = sched;
    FlowTrajectory traj = run_flow(m, fp);
    for (int i = 0; i <= 40; ++i) {
      double t = 0.005 * i;
      GeometryState st = traj.state_at(t);
      double want_a = m.torus_metric0[0] + 2.0 * schedule_integral_closed(sched, t);
      worst = std::max(worst, rel_err(st.metric(0), want_a));
      worst = std::max(worst, rel_err(st.metric(1), m.torus_metric0[1]));
      worst = std::max(worst, rel_err(st.metric(2), m.torus_metric0[2]));
    }
  }

  double sec = sw.seconds();
  Outcome oc;
  oc.pass = worst <= 1e-8 && sec < 1.0;
  oc.note = "max_rel=" + fmt(worst) + " (tol 1e-8), elapsed=" + fmt(sec) + "s (budget 1s)";
  return oc;
}

// --- criterion 2: PDE kernel against the closed-form kernels ---------------

Outcome criterion_kernel_oracles(GateContext& cx) {
  struct Query {
    const char* label;
    const FlowTrajectory* traj;
    const KernelParams* kp;
    double s, t;
  };
  std::vector<Query> queries = {
      {"sphere", cx.traj_sphere.get(), &cx.sphere.kernel, 0.19, 0.20},
      {"sphere", cx.traj_sphere.get(), &cx.sphere.kernel, 0.05, 0.10},
      {"sphere", cx.traj_sphere.get(), &cx.sphere.kernel, 0.00, 0.20},
      {"torus", cx.traj_torus.get(), &cx.torus.kernel, 0.19, 0.20},
      {"torus", cx.traj_torus.get(), &cx.torus.kernel, 0.05, 0.10},
      {"torus", cx.traj_torus.get(), &cx.torus.kernel, 0.00, 0.20},
  };

  double worst_err = 0.0, worst_sec = 0.0;
  std::string worst_at;
  for (const Query& q : queries) {
    Stopwatch sw;
    ForwardKernelResult fwd =
        forward_solve(*q.traj, {0, 0, 0}, q.s, q.t, *q.kp, 0.5 * (q.s + q.t));
    KernelField oracle = oracle_kernel(*q.traj, {0, 0, 0}, q.s, q.t, *q.kp);
    double err = compare_linf(fwd.at_end, oracle);
    double sec = sw.seconds();
    worst_sec = std::max(worst_sec, sec);
    if (err > worst_err) {
      worst_err = err;
      worst_at = std::string(q.label) + " gap=" + fmt(q.t - q.s);
    }
  }

  Outcome oc;
  oc.pass = worst_err <= 1e-3 && worst_sec < 30.0;
  oc.note = "max linf_rel=" + fmt(worst_err) + " at " + worst_at +
            " (tol 1e-3), slowest query=" + fmt(worst_sec) + "s (budget 30s)";
  return oc;
}

// --- criterion 3: conjugate-mass conservation and the semigroup identity ---

Outcome criterion_mass_and_semigroup(GateContext& cx) {
  struct Check {
    const char* label;
    const FlowTrajectory* traj;
    const VerifyRunResult* ver;
    const KernelParams* kp;
    double s, t;
    double mass_tol, resid_tol;
  };
  std::vector<Check> checks = {
      {"sphere", cx.traj_sphere.get(), &cx.ver_sphere, &cx.sphere.kernel, 0.02, 0.18, 1e-6, 1e-8},
      {"torus", cx.traj_torus.get(), &cx.ver_torus, &cx.torus.kernel, 0.02, 0.18, 1e-6, 1e-8},
      {"coupled", cx.traj_coupled.get(), &cx.ver_coupled, &cx.coupled.kernel, 0.02, 0.13, 1e-3,
       1e-3},
  };

  bool pass = true;
  std::string note;
  for (const Check& c : checks) {
    KernelDiagnostics d = kernel_diagnostics(*c.traj, {0, 0, 0}, {0, 0, 0}, c.s, c.t, *c.kp);
    double mass_gap = std::abs(d.Jtilde_s - 1.0);
    // the verification rows carry the conjugate mass for every shipped sample
    for (const BoundRow& row : c.ver->report.rows)
      mass_gap = std::max(mass_gap, std::abs(row.jtilde_s - 1.0));
    bool ok = mass_gap <= c.mass_tol && d.semigroup_residual <= c.resid_tol;
    pass = pass && ok;
    if (!note.empty()) note += "; ";
    note += std::string(c.label) + " |J~-1|=" + fmt(mass_gap) + " (tol " + fmt(c.mass_tol) +
            "), resid=" + fmt(d.semigroup_residual) + " (tol " + fmt(c.resid_tol) + ")";
  }

  Outcome oc;
  oc.pass = pass;
  oc.note = note;
  return oc;
}

// --- criterion 4: reaction floor and kernel-mass comparison ----------------

Outcome criterion_floor_and_mass(GateContext& cx) {
  struct Entry {
    const char* label;
    const BoundReport* rep;
  };
  std::vector<Entry> entries = {{"sphere", &cx.ver_sphere.report},
                                {"torus", &cx.ver_torus.report},
                                {"coupled", &cx.ver_coupled.report}};

  bool pass = true;
  double worst_floor = 1e300;   // smallest floor margin over configs
  double worst_mass = -1e300;   // largest J(t) - chi^{n/2}
  for (const Entry& e : entries) {
    const BoundReport& r = *e.rep;
    pass = pass && r.s_floor_ok && r.s_floor_worst >= -1e-6;
    worst_floor = std::min(worst_floor, r.s_floor_worst);
    for (const BoundRow& row : r.rows) {
      double chi =
          r.nonneg_case ? 1.0 : (r.m0 - r.c_n * row.t) / (r.m0 - r.c_n * row.s);
      double gap = row.j_t - std::pow(chi, 1.5);
      worst_mass = std::max(worst_mass, gap);
      pass = pass && gap <= 1e-6;
    }
  }

  Outcome oc;
  oc.pass = pass;
  oc.note = "floor margin=" + fmt(worst_floor) + " (>= -1e-6), max J - chi^{3/2}=" +
            fmt(worst_mass) + " (<= 1e-6)";
  return oc;
}

// --- criterion 5: full bound chain on the negative-curvature torus ---------

Outcome criterion_torus_chain(GateContext& cx) {
  const BoundReport& r = cx.ver_torus.report;
  bool pass = !r.nonneg_case && std::abs(r.m0 + 1.0) <= 1e-9;
  pass = pass && !r.sobolev.positive_case && !r.sobolev.from_override;

  double min_ratio = 1e300, worst_chain = -1e300;
  for (const BoundRow& row : r.rows) {
    min_ratio = std::min(min_ratio, row.ratio_theorem);
    double cs = std::sqrt(row.p_mid * row.q_mid);
    worst_chain = std::max(worst_chain, row.g_actual / cs - 1.0);
    pass = pass && row.g_actual <= cs * (1.0 + 1e-6);
  }
  pass = pass && min_ratio >= 1.0 && r.all_pass;

  double sec = cx.torus_flow_seconds + cx.torus_verify_seconds;
  pass = pass && sec < 300.0;

  Outcome oc;
  oc.pass = pass;
  oc.note = "m0=" + fmt(r.m0) + ", min ratio=" + fmt(min_ratio) +
            " (>= 1), max G/sqrt(PQ)-1=" + fmt(worst_chain) + " (<= 1e-6), elapsed=" +
            fmt(sec) + "s (budget 300s)";
  return oc;
}

// --- criterion 6: decay constants on the shrinking sphere ------------------

Outcome criterion_sphere_decay(GateContext& cx) {
  const BoundReport& r = cx.ver_sphere.report;
  bool pass = r.strict_positive;

  double worst_gdt = 0.0;
  std::vector<double> theorem_consts;
  for (const BoundRow& row : r.rows) {
    double dt = row.t - row.s;
    double gdt = row.g_actual * std::pow(dt, 1.5);
    worst_gdt = std::max(worst_gdt, gdt);
    pass = pass && gdt <= r.corollary_plain && gdt <= r.corollary_squared;
    pass = pass && std::isfinite(row.bound_corollary) && row.ratio_corollary >= 1.0;
    theorem_consts.push_back(row.bound_theorem * std::pow(dt, 1.5));
  }

  double lo = theorem_consts[0], hi = theorem_consts[0];
  for (double v : theorem_consts) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double spread = (hi - lo) / hi;
  pass = pass && spread <= 1e-8;

  const char* used =
      r.sobolev.convention == AConvention::squared ? "squared" : "plain";
  Outcome oc;
  oc.pass = pass;
  oc.note = "max G*(t-s)^{3/2}=" + fmt(worst_gdt) + " vs plain-K const " +
            fmt(r.corollary_plain) + " and squared-K const " + fmt(r.corollary_squared) +
            " (shipped convention: " + used + "); theorem const spread=" + fmt(spread) +
            " (<= 1e-8)";
  return oc;
}

// --- criterion 7: spectral floor and the flat embedding constant -----------

// Sobolev quotient of the extremal radial profile (1 + r^2)^(-1/2) in R^3,
// integrated over the compactified radius r = tan(phi)
double bubble_quotient_3d() {
  QuadratureOptions opt;
  opt.abs_tol = 1e-12;
  auto grad_sq = [](double phi) {
    double r = std::tan(phi);
    double sec2 = 1.0 + r * r;
    double du = -r / std::pow(1.0 + r * r, 1.5);
    return du * du * r * r * sec2;
  };
  auto pow_six = [](double phi) {
    double r = std::tan(phi);
    double sec2 = 1.0 + r * r;
    return r * r / std::pow(1.0 + r * r, 3.0) * sec2;
  };
  double shell = 4.0 * kPi;
  double dirichlet = shell * adaptive_simpson(grad_sq, 0.0, 0.5 * kPi, opt);
  double lp = shell * adaptive_simpson(pow_six, 0.0, 0.5 * kPi, opt);
  return std::pow(lp, 1.0 / 6.0) / std::sqrt(dirichlet);
}

Outcome criterion_sobolev_suite(GateContext& cx) {
  double lam_sphere =
      lambda0_alpha(cx.sphere.manifold, initial_state(cx.sphere.manifold));
  double lam_torus = lambda0_alpha(cx.torus.manifold, initial_state(cx.torus.manifold));
  double k = talenti_constant(3);
  double bubble = bubble_quotient_3d();
  double bubble_rel = std::abs(bubble - k) / k;

  Outcome oc;
  oc.pass = std::abs(lam_sphere - 6.0) <= 1e-6 && std::abs(lam_torus + 1.0) <= 1e-6 &&
            bubble_rel <= 5e-3;
  oc.note = "sphere lambda0=" + fmt(lam_sphere) + " (6 +- 1e-6), torus lambda0=" +
            fmt(lam_torus) + " (-1 +- 1e-6), bubble quotient vs closed form rel=" +
            fmt(bubble_rel) + " (<= 5e-3)";
  return oc;
}

// --- criterion 8: quadrature refinement, grid halving, determinism ---------

Outcome criterion_hygiene(GateContext& cx) {
  bool pass = true;
  std::string note;

  // bound quadratures: tightening the tolerance two decades moves nothing
  {
    ComparisonInputs in = make_comparison_inputs(*cx.traj_torus, cx.ver_torus.constants);
    ComparisonInputs tight = in;
    tight.quad.abs_tol = 1e-10;
    double worst = 0.0;
    for (auto [s, t] : {std::pair{0.02, 0.18}, std::pair{0.05, 0.20}})
      worst = std::max(worst, rel_err(theorem_bound(tight, s, t), theorem_bound(in, s, t)));
    pass = pass && worst <= 1e-7;
    note += "bound refine rel=" + fmt(worst);
  }

  // panel halving of the mid-integrand with constant coefficient curves
  {
    ComparisonInputs in;
    in.dimension = 3;
    in.m0 = -1.0;
    in.sobolev.times = {0.0, 1.0};
    in.sobolev.A_curve = {0.3, 0.3};
    in.sobolev.B_curve = {0.12, 0.12};
    double s = 0.05, mid = 0.35;
    auto f = [&](double u) {
      return std::pow(chi_factor(in, u, s), -2.0) *
             std::exp(2.0 * H_integral(in, s, u) / 3.0) / in.sobolev.A_at(u);
    };
    double coarse = fixed_simpson(f, s, mid, 64);
    double fine = fixed_simpson(f, s, mid, 128);
    double change = rel_err(fine, coarse);
    pass = pass && change <= 1e-7;
    note += ", panel halving rel=" + fmt(change);
  }

  // flow integrals: splitting the interval reproduces the whole
  {
    double worst = 0.0;
    const FlowTrajectory& traj = *cx.traj_sphere;
    double full = traj.inv_coef_integral(0, 0.02, 0.18);
    double split = traj.inv_coef_integral(0, 0.02, 0.10) + traj.inv_coef_integral(0, 0.10, 0.18);
    worst = std::max(worst, rel_err(split, full));
    full = traj.mean_S_integral(0.02, 0.18);
    split = traj.mean_S_integral(0.02, 0.10) + traj.mean_S_integral(0.10, 0.18);
    worst = std::max(worst, rel_err(split, full));
    pass = pass && worst <= 1e-7;
    note += ", split additivity rel=" + fmt(worst);
  }

  // spatial convergence: the finite-difference grids gain at least the
  // advertised factor when halved
  {
    FlowParams fp;
    fp.t_end = 0.15;
    fp.dt = 1e-3;
    KernelParams kp;
    kp.min_steps = 800;
    double errs[2];
    int grids[2] = {96, 192};
    for (int i = 0; i < 2; ++i) {
      ManifoldConfig m = cx.torus.manifold;
      m.grid = grids[i];
      FlowTrajectory traj = run_flow(m, fp);
      ForwardKernelResult fwd = forward_solve(traj, {0, 0, 0}, 0.02, 0.12, kp, 0.07);
      errs[i] = compare_linf(fwd.at_end, theta_oracle(traj, {0, 0, 0}, 0.02, 0.12, kp));
    }
    double gain = errs[0] / errs[1];
    pass = pass && gain >= 3.0;
    note += ", grid-halving gain=" + fmt(gain) + "x (>= 3)";
  }

  // rerunning the shipped torus pipeline reproduces the artifacts exactly
  {
    FlowRunResult flow2 = run_flow_pipeline(cx.torus);
    VerifyRunResult ver2 = run_verify_pipeline(cx.torus, *flow2.trajectory);
    bool same_traj = read_file(cx.torus_traj_path) == cx.torus_traj_bytes;
    bool same_bounds = read_file(cx.torus_bounds_path) == cx.torus_bounds_bytes;
    pass = pass && same_traj && same_bounds;
    note += std::string(", rerun bytes: trajectory ") + (same_traj ? "identical" : "DIFFER") +
            ", bounds " + (same_bounds ? "identical" : "DIFFER");
  }

  Outcome oc;
  oc.pass = pass;
  oc.note = note;
  return oc;
}

bool report(int index, const char* name, const std::function<Outcome()>& fn) {
  Outcome oc;
  try {
    oc = fn();
  } catch (const std::exception& e) {
    oc.pass = false;
    oc.note = std::string("exception: ") + e.what();
  }
  std::printf("[%s] %d %s: %s\n", oc.pass ? "PASS" : "FAIL", index, name, oc.note.c_str());
  std::fflush(stdout);
  return oc.pass;
}

std::string config_dir() {
  const char* v = std::getenv("RHFLOW_CONFIG_DIR");
  return v ? std::string(v) : std::string("configs");
}

void run_shipped_pipelines(GateContext& cx) {
  std::string dir = config_dir();
  cx.sphere = load_run_config(dir + "/sphere.json");
  cx.torus = load_run_config(dir + "/torus.json");
  cx.coupled = load_run_config(dir + "/coupled.json");

  Stopwatch flow_t;
  FlowRunResult torus_flow = run_flow_pipeline(cx.torus);
  cx.torus_flow_seconds = flow_t.seconds();
  cx.traj_torus = torus_flow.trajectory;
  cx.torus_traj_path = torus_flow.csv_path;

  cx.traj_sphere = run_flow_pipeline(cx.sphere).trajectory;
  cx.traj_coupled = run_flow_pipeline(cx.coupled).trajectory;
  std::printf("-- flows done (torus %.1fs)\n", cx.torus_flow_seconds);
  std::fflush(stdout);

  Stopwatch ver_t;
  cx.ver_torus = run_verify_pipeline(cx.torus, *cx.traj_torus);
  cx.torus_verify_seconds = ver_t.seconds();
  cx.torus_bounds_path = cx.ver_torus.csv_path;
  cx.torus_traj_bytes = read_file(cx.torus_traj_path);
  cx.torus_bounds_bytes = read_file(cx.torus_bounds_path);

  cx.ver_sphere = run_verify_pipeline(cx.sphere, *cx.traj_sphere);
  cx.ver_coupled = run_verify_pipeline(cx.coupled, *cx.traj_coupled);
  std::printf("-- verification reports done (torus %.1fs)\n", cx.torus_verify_seconds);
  std::fflush(stdout);
}

}  // namespace

int main() {
  GateContext cx;
  try {
    run_shipped_pipelines(cx);
  } catch (const std::exception& e) {
    std::printf("[FAIL] setup: %s\n", e.what());
    return 8;
  }

  int failures = 0;
  failures += !report(1, "flow closed forms", [&] { return criterion_flow_closed_forms(cx); });
  failures += !report(2, "kernel oracle agreement", [&] { return criterion_kernel_oracles(cx); });
  failures +=
      !report(3, "mass conservation and semigroup", [&] { return criterion_mass_and_semigroup(cx); });
  failures += !report(4, "reaction floor and mass comparison",
                      [&] { return criterion_floor_and_mass(cx); });
  failures += !report(5, "torus bound chain", [&] { return criterion_torus_chain(cx); });
  failures += !report(6, "sphere decay constants", [&] { return criterion_sphere_decay(cx); });
  failures += !report(7, "spectral floor and embedding constant",
                      [&] { return criterion_sobolev_suite(cx); });
  failures += !report(8, "numerical hygiene", [&] { return criterion_hygiene(cx); });

  std::printf("acceptance: %d/8 criteria passed\n", 8 - failures);
  return failures;
}
