#pragma once

#include <array>

#include "core/config.hpp"
#include "core/flow.hpp"

namespace rhflow {

enum class KernelSolver { forward_pde, spectral_oracle };

// Heat kernel G(x,t;y,s) restricted to one time slice, in tensor-product
// form: the full value at a node triple is the product of the per-factor
// profiles. The sphere stores a single zonal profile in angle from the
// source pole. A conjugate field lives in the source slot of G: it is
// z -> G(source, source_time; z, field_time) with field_time < source_time.
struct KernelField {
  KernelSolver solver = KernelSolver::forward_pde;
  bool conjugate = false;
  std::array<int, 3> source{0, 0, 0};
  double source_time = 0.0;
  double field_time = 0.0;
  int factors = 1;
  std::array<Vec, 3> profile;

  double value_at(const std::array<int, 3>& node) const;
  double max_abs() const;
  double min_value() const;
};

struct ForwardKernelResult {
  KernelField at_end;      // slice at t
  KernelField at_capture;  // slice at the capture time (midpoint by default)
};

struct ConjugateKernelResult {
  KernelField at_end;      // slice at s
  KernelField at_capture;
};

// Crank-Nicolson solve of u_t = Laplace(g(tau)) u from a mollified delta at
// (y, s); initial data is the band-limited oracle at s + eps where a closed
// form exists, a normalized discrete delta otherwise.
ForwardKernelResult forward_solve(const FlowTrajectory& traj, const std::array<int, 3>& y,
                                  double s, double t, const KernelParams& kp,
                                  double capture_time);

// Conjugate equation solved backward from a delta at (x, t); the spatially
// constant part of the reaction term is removed by an exact integrating
// factor, the coupled variant keeps the potential inside the stepping matrix.
ConjugateKernelResult conjugate_solve(const FlowTrajectory& traj, const std::array<int, 3>& x,
                                      double t, double s, const KernelParams& kp,
                                      double capture_time);

// Closed forms. sphere_oracle: spectral sum over zonal harmonics with the
// effective time integral of 1/c; theta_oracle: product of wrapped 1-D
// Gaussians with per-coordinate effective times.
bool has_kernel_oracle(const ManifoldConfig& cfg);
KernelField sphere_oracle(const FlowTrajectory& traj, const std::array<int, 3>& y, double s,
                          double t, const KernelParams& kp);
KernelField theta_oracle(const FlowTrajectory& traj, const std::array<int, 3>& y, double s,
                         double t, const KernelParams& kp);
KernelField oracle_kernel(const FlowTrajectory& traj, const std::array<int, 3>& y, double s,
                          double t, const KernelParams& kp);
// the same kernel viewed in its source slot: z -> G(x, t; z, field_time)
KernelField conjugate_oracle(const FlowTrajectory& traj, const std::array<int, 3>& x, double t,
                             double field_time, const KernelParams& kp);

// integral of the field (or its square) against the measure at field_time
double kernel_mass(const FlowTrajectory& traj, const KernelField& field);
double kernel_mass_sq(const FlowTrajectory& traj, const KernelField& field);

// L2(d mu at field_time) pairing of two slices at equal times. On the sphere
// the fields may be zonal about different poles; cos_gamma is the cosine of
// the angle between the poles and the pairing goes through the zonal
// transform and the addition theorem.
double pair_fields(const FlowTrajectory& traj, const KernelField& a, const KernelField& b,
                   double cos_gamma);

// max |a - b| / max |b| over the full product grid
double compare_linf(const KernelField& a, const KernelField& b);

// J(t), J~(s), P(mid), Q(mid) and the semigroup cross-check for one sample
struct KernelDiagnostics {
  double G_fwd = 0.0;        // forward field at (x, t)
  double G_conj = 0.0;       // conjugate field at (y, s)
  double J_t = 0.0;          // mass of the forward kernel at t
  double Jtilde_s = 0.0;     // conserved conjugate mass at s
  double P_mid = 0.0;        // squared mass of the forward kernel at mid
  double Q_mid = 0.0;        // squared mass of the conjugate kernel at mid
  double semigroup = 0.0;    // pairing of the two mid slices
  double semigroup_residual = 0.0;
  double mid_time = 0.0;
};
KernelDiagnostics kernel_diagnostics(const FlowTrajectory& traj, const std::array<int, 3>& x,
                                     const std::array<int, 3>& y, double s, double t,
                                     const KernelParams& kp);

// |semigroup pairing at m - G(x,t;y,s)| / G(x,t;y,s); use_oracle selects the
// closed-form fields where available instead of the PDE solves
double semigroup_check(const FlowTrajectory& traj, const std::array<int, 3>& x,
                       const std::array<int, 3>& y, double s, double t, double m,
                       const KernelParams& kp, bool use_oracle);

// cosine of the geodesic angle between sphere sample nodes: y is the pole,
// x indexes the grid angle away from it
double sphere_sample_cos_gamma(const ManifoldConfig& cfg, const std::array<int, 3>& x);

}  // namespace rhflow
