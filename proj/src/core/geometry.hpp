// Discrete geometry of the three symmetric models.
//
// round_sphere   g = c(t) * g_round(S^n), fields are zonal profiles on a
//                cell-centered theta grid over [0, pi].
// torus_linear   flat T^3 with constant diagonal metric diag(A,B,C) and the
//                linear circle map phi = 2*pi*d*x1/L1; fields live on the x1
//                grid (constant in x2, x3).
// coupled_circle T^3 with g = A(x1,t) dx1^2 + dx2^2 + dx3^2 and the map
//                phi = 2*pi*d*x1/L1 + psi(x1,t); fields live on the x1 grid.
//
// The quadrature weights and the discrete Laplacian are built as a matched
// pair: weighted-operator matrices are exactly symmetric, annihilate
// constants, and are negative semidefinite, so integration by parts holds at
// machine precision on the grid.
#pragma once

#include "core/config.hpp"

namespace rhflow {

struct GeometryState {
  double t = 0.0;
  Vec metric;  // sphere: [c]; torus_linear: [A,B,C]; coupled: A[i] (size N)
  Vec map;     // coupled: psi[i]; otherwise empty (winding lives in the config)
};

struct ScalarField {
  Vec values;  // samples on the reduced grid (theta nodes or x1 nodes)
};

struct CurvatureData {
  Vec R;             // scalar curvature
  Vec grad_phi_sq;   // |grad phi|^2
  Vec S;             // R - alpha(t) |grad phi|^2
  Vec tension;       // tension field of the map (zero unless coupled)
  std::array<Vec, 3> ric_diag;  // orthonormal-frame diagonal Ricci entries
  std::array<Vec, 3> s_diag;    // orthonormal-frame diagonal of the twisted tensor
};

GeometryState initial_state(const ManifoldConfig& cfg);

// number of reduced-grid nodes (N_theta or N)
int grid_size(const ManifoldConfig& cfg);

// node coordinates on the reduced grid: theta_j = (j+1/2)*pi/N for the sphere,
// x1_i = i*L1/N for the tori
Vec grid_nodes(const ManifoldConfig& cfg);

// full-manifold measure weights attached to reduced-grid nodes; integrate()
// is the weighted sum. Constants integrate to the exact model volume.
Vec measure_weights(const ManifoldConfig& cfg, const GeometryState& st);

double integrate(const ManifoldConfig& cfg, const GeometryState& st, const ScalarField& f);

// closed-form volume (sphere, linear torus) or the defining quadrature (coupled)
double analytic_volume(const ManifoldConfig& cfg, const GeometryState& st);

// dense reduced-grid Laplace-Beltrami operator at this state
Mat laplacian_matrix(const ManifoldConfig& cfg, const GeometryState& st);

ScalarField laplacian_apply(const ManifoldConfig& cfg, const GeometryState& st,
                            const ScalarField& f);

CurvatureData curvature(const ManifoldConfig& cfg, const GeometryState& st);

double min_S(const ManifoldConfig& cfg, const GeometryState& st);
double max_S(const ManifoldConfig& cfg, const GeometryState& st);

// --- kernel factor structure -------------------------------------------------
// The heat kernel factorizes over the product structure: one zonal factor for
// the sphere, three periodic 1-D factors for the tori.

int factor_count(const ManifoldConfig& cfg);
int factor_size(const ManifoldConfig& cfg, int f);

// 1-D measure weights of factor f at this state; the product over factors
// equals the full measure weight of the node triple.
Vec factor_weights(const ManifoldConfig& cfg, const GeometryState& st, int f);

// True if factor f's Laplacian is scalar(t) * fixed_matrix (everything except
// the coupled x1 factor).
bool factor_coef_is_scalar(const ManifoldConfig& cfg, int f);

// the scalar metric coefficient of factor f (c, A, B, C or 1)
double factor_scalar_coef(const ManifoldConfig& cfg, const GeometryState& st, int f);

// coefficient-independent factor operator: unit-radius zonal flux Laplacian for
// the sphere, periodic second-derivative matrix for torus coordinates. The
// operator at a state is (1/coef) * base.
Mat factor_base_matrix(const ManifoldConfig& cfg, int f);

// the coupled x1 operator (1/sqrt(A)) d/dx (1/sqrt(A) d/dx .) at this state
Mat coupled_x1_operator(const ManifoldConfig& cfg, const GeometryState& st);

// --- periodic differentiation helpers ----------------------------------------
// Spectral matrices when n is a power of two, 4th-order centered otherwise.

bool is_power_of_two(int n);
Mat periodic_d1(int n, double length);
Mat periodic_d2(int n, double length);

// remove the unresolved top Fourier band from periodic samples (k = 0 kept, so
// sums are preserved); used to clean discrete-delta initial data
Vec filter_nyquist_band(const Vec& v);

// surface area of the unit n-sphere S^n
double sphere_surface_area(int n);

}  // namespace rhflow
