#pragma once

#include "core/config.hpp"

namespace rhflow {

// Zonal spherical harmonics on the unit n-sphere, indexed by degree k.
// Z_k(cos gamma) is normalized so Z_k(1) = 1; mu_k and m_k are the Laplace
// eigenvalue and the eigenspace dimension.

double zonal_eigenvalue(int dim, int k);
double zonal_multiplicity(int dim, int k);
double zonal_eval(int dim, int k, double x);

// Z_k(x_j) for k = 0..kmax evaluated along a vector of cosines; row k holds
// degree k. Built with the three-term recurrence in one sweep.
Mat zonal_table(int dim, int kmax, const Vec& x);

}  // namespace rhflow
