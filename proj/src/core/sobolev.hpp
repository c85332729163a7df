#pragma once

#include <array>
#include <vector>

#include "core/config.hpp"
#include "core/flow.hpp"

namespace rhflow {

// Sharp constant of the Euclidean embedding W^{1,2} -> L^{2n/(n-2)}, from the
// closed-form Beta integrals of the extremal radial profile.
double talenti_constant(int n);

// Smallest eigenvalue of v -> integral(4 |grad v|^2 + S v^2) with unit L^2
// norm on the reduced grid; optionally returns the minimizer.
double lambda0_alpha(const ManifoldConfig& cfg, const GeometryState& st, Vec* eigvec = nullptr);

// Test field in tensor-product form, matching the kernel factor layout.
struct Probe {
  int factors = 1;
  std::array<Vec, 3> profile;
  std::string label;
};

// Fixed seeded suite: 8 harmonics, 40 random band-limited fields, 16
// concentrated bumps of decreasing width (widths clamped a few cells above
// the grid scale).
std::vector<Probe> build_probe_suite(const ManifoldConfig& cfg, unsigned long long seed);

// Worst slack of (integral |v|^p)^{2/p} <= A integral(|grad v|^2 + S v^2 / 4)
// + B integral v^2 over the probes; negative means (A, B) is violated.
double probe_inequality(const ManifoldConfig& cfg, const GeometryState& st, double A, double B,
                        const std::vector<Probe>& probes);

struct SobolevConstants {
  double K = 0.0;              // Euclidean best constant
  double A_positive = 0.0;     // coefficient used when the reaction term is positive
  AConvention convention = AConvention::squared;
  bool positive_case = false;  // strict: inf S(., 0) > 0
  bool from_override = false;
  std::vector<double> times;
  std::vector<double> A_curve;
  std::vector<double> B_curve;
  std::vector<double> lambda0;

  double A_at(double t) const;
  double B_at(double t) const;
};

// Probe-based estimation: in the positive case A is constant and B vanishes;
// otherwise A is the minimal bump-admissible constant on the initial slice
// and B(t) the minimal shift passing the full suite at each requested time.
// Estimates are lower bounds on admissible constants, not certified values.
SobolevConstants estimate_AB(const FlowTrajectory& traj, const std::vector<double>& times,
                             const SobolevParams& sp, unsigned long long seed);

}  // namespace rhflow
