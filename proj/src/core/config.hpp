// Run configuration: manifold model, flow/kernel/sobolev solver parameters,
// verification samples. Loaded from JSON; validation refuses configurations
// that violate the standing hypotheses (alpha non-increasing, n >= 3, positive
// metric data, sphere lifetime before collapse, ordered sample times).
#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "core/schedule.hpp"

namespace rhflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Variant { round_sphere, torus_linear, coupled_circle };

const char* variant_name(Variant v);

struct ManifoldConfig {
  Variant variant = Variant::round_sphere;
  int dimension = 3;  // n; kept symbolic in all formulas. Tori require n == 3.

  // round_sphere: initial conformal factor r0^2 (metric = r^2 * round unit metric)
  double r2_0 = 1.0;

  std::array<double, 3> torus_lengths{6.283185307179586, 6.283185307179586,
                                      6.283185307179586};
  // torus_linear: constant diagonal metric (A, B, C)
  std::array<double, 3> torus_metric0{1.0, 1.0, 1.0};
  // coupled_circle: periodic samples of the x1 coefficient A0[i] (B = C = 1)
  Vec a_samples0;

  // circle-valued map: phi(x1) = 2*pi*d*x1/L1 + psi(x1); sphere map is constant
  int winding = 0;
  Vec psi_samples0;  // coupled_circle only

  int grid = 256;  // N_theta (sphere) or N per coordinate (tori)

  CouplingSchedule coupling;

  void validate() const;
  bool is_sphere() const { return variant == Variant::round_sphere; }
};

enum class Integrator { rk4, rk45_adaptive };

struct FlowParams {
  double t_end = 0.1;
  double dt = 1e-3;
  Integrator integrator = Integrator::rk4;
  double rtol = 1e-8;
  double atol = 1e-10;
  int checkpoint_stride = 10;  // fixed-step recording period; adaptive runs record every step
  bool freeze = false;      // test mode: hold metric and map fixed in time
  double cfl_safety = 0.5;  // dt <= safety * dx^2 * min(A) / 2 for the map PDE
  int max_rejects = 40;
  double degeneracy_rel_floor = 1e-8;  // relative to the initial metric scale

  void validate() const;
};

struct KernelParams {
  int min_steps = 200;             // lower bound on Crank-Nicolson step count
  double oracle_tail_tol = 1e-14;  // eigen-sum truncation threshold
  double mollify_eps_factor = 1e-4;  // delta mollification: eps = factor*(t-s)

  void validate() const;
};

enum class AConvention { squared, plain };  // A = K(n,2)^2 vs A = K(n,2)

struct SobolevParams {
  AConvention convention = AConvention::squared;
  std::vector<double> times;  // estimation times; empty = uniform over the run
  // optional user override: rows (t, A, B), linearly interpolated
  std::vector<std::array<double, 3>> override_curve;
  double bisect_rtol = 1e-4;
  int n_slices_default = 9;

  void validate() const;
};

struct Sample {
  std::array<int, 3> x{0, 0, 0};
  std::array<int, 3> y{0, 0, 0};
  double s = 0.0;
  double t = 0.1;
};

struct RunConfig {
  ManifoldConfig manifold;
  FlowParams flow;
  KernelParams kernel;
  SobolevParams sobolev;
  std::vector<Sample> samples;
  std::string output_dir = "out";
  unsigned long long seed = 42;

  void validate() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

}  // namespace rhflow
