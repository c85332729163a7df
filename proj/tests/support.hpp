// Shared helpers for the test binaries: compact model builders sized for fast
// runs, environment lookup for the CLI binary and shipped config directory.
#pragma once

#include <cmath>
#include <cstdlib>
#include <string>

#include "core/config.hpp"

namespace testsupport {

constexpr double kPi = 3.141592653589793238462643383279502884;

inline rhflow::ManifoldConfig sphere_manifold(int grid = 64, double r2 = 1.0,
                                              double alpha0 = 1.0) {
  rhflow::ManifoldConfig m;
  m.variant = rhflow::Variant::round_sphere;
  m.dimension = 3;
  m.grid = grid;
  m.r2_0 = r2;
  m.coupling.form = rhflow::ScheduleForm::constant;
  m.coupling.alpha0 = alpha0;
  return m;
}

inline rhflow::ManifoldConfig torus_manifold(int grid = 32, int winding = 1,
                                             double alpha0 = 1.0) {
  rhflow::ManifoldConfig m;
  m.variant = rhflow::Variant::torus_linear;
  m.dimension = 3;
  m.grid = grid;
  m.winding = winding;
  m.coupling.form = rhflow::ScheduleForm::constant;
  m.coupling.alpha0 = alpha0;
  return m;
}

inline rhflow::ManifoldConfig coupled_manifold(int grid = 32, double a_amp = 0.2,
                                               double psi_amp = 0.05, double alpha0 = 0.05) {
  rhflow::ManifoldConfig m;
  m.variant = rhflow::Variant::coupled_circle;
  m.dimension = 3;
  m.grid = grid;
  m.winding = 1;
  m.coupling.form = rhflow::ScheduleForm::constant;
  m.coupling.alpha0 = alpha0;
  m.a_samples0.resize(grid);
  m.psi_samples0.resize(grid);
  for (int i = 0; i < grid; ++i) {
    double x = 2.0 * kPi * i / grid;
    m.a_samples0(i) = 1.0 + a_amp * std::cos(x);
    m.psi_samples0(i) = psi_amp * std::sin(x);
  }
  return m;
}

inline rhflow::FlowParams quick_flow(double t_end, double dt = 1e-3) {
  rhflow::FlowParams f;
  f.t_end = t_end;
  f.dt = dt;
  return f;
}

inline rhflow::KernelParams quick_kernel(int steps = 200) {
  rhflow::KernelParams k;
  k.min_steps = steps;
  return k;
}

inline std::string env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string(fallback);
}

inline std::string config_dir() { return env_or("RHFLOW_CONFIG_DIR", "configs"); }
inline std::string cli_path() { return env_or("RHFLOW_CLI", ""); }

}  // namespace testsupport
