#pragma once

#include <vector>

#include "core/config.hpp"
#include "core/geometry.hpp"

namespace rhflow {

// One stored point of the evolving geometry. Derivatives are kept so states
// between checkpoints can be recovered by cubic Hermite interpolation.
struct FlowCheckpoint {
  double t = 0.0;
  Vec metric;
  Vec map;
  Vec dmetric;
  Vec dmap;
  double min_s = 0.0;
  double max_s = 0.0;
  double volume = 0.0;
};

class FlowTrajectory {
 public:
  FlowTrajectory(ManifoldConfig manifold, FlowParams params,
                 std::vector<FlowCheckpoint> checkpoints);

  const ManifoldConfig& manifold() const { return manifold_; }
  const FlowParams& params() const { return params_; }
  const std::vector<FlowCheckpoint>& checkpoints() const { return checkpoints_; }
  double t_end() const { return checkpoints_.back().t; }

  // spatial minimum of R - alpha |grad phi|^2 at t = 0
  double inf_S0() const { return checkpoints_.front().min_s; }

  GeometryState state_at(double t) const;
  double min_S_at(double t) const;

  // true when the reaction term is spatially constant (sphere and flat torus
  // with a linear map); the conjugate solver then splits it off exactly
  bool spatially_constant_S() const;
  double scalar_S_at(double t) const;

  // integral of 1 / coef_f over [s, t] for factors with a scalar diffusion
  // coefficient; this is the effective-time reparametrization of the solver
  double inv_coef_integral(int factor, double s, double t) const;

  // integral of the (spatially constant) reaction term over [s, t]
  double mean_S_integral(double s, double t) const;

 private:
  ManifoldConfig manifold_;
  FlowParams params_;
  std::vector<FlowCheckpoint> checkpoints_;
};

// Closed-form metric for the variants whose flow reduces to scalar ODEs with
// exact solutions (sphere conformal factor, torus diagonal entries). The
// coupled variant has no closed form.
bool has_closed_form(const ManifoldConfig& cfg);
GeometryState closed_form_state(const ManifoldConfig& cfg, double t);

FlowTrajectory run_flow(const ManifoldConfig& manifold, const FlowParams& params);

}  // namespace rhflow
