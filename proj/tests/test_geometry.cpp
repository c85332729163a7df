#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "core/common.hpp"
#include "core/geometry.hpp"
#include "core/zonal.hpp"
#include "support.hpp"

using namespace rhflow;
using testsupport::kPi;

namespace {

ScalarField constant_field(int n, double v) {
  ScalarField f;
  f.values = Vec::Constant(n, v);
  return f;
}

// worst-case row/column residuals of the weighted operator M = diag(w) * L
struct OperatorResiduals {
  double asym;      // max |M - M^T|
  double constants; // max |L * 1|
  double mass;      // max |1^T M|
  double scale;     // max |M|
  double top_eig;   // largest eigenvalue of sym(M)
};

OperatorResiduals weighted_residuals(const ManifoldConfig& cfg, const GeometryState& st) {
  const Mat L = laplacian_matrix(cfg, st);
  const Vec w = measure_weights(cfg, st);
  const Mat M = w.asDiagonal() * L;
  OperatorResiduals r{};
  r.asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  r.constants = (L * Vec::Ones(L.cols())).cwiseAbs().maxCoeff();
  r.mass = (Vec::Ones(M.rows()).transpose() * M).cwiseAbs().maxCoeff();
  r.scale = M.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
  r.top_eig = es.eigenvalues().maxCoeff();
  return r;
}

}  // namespace

TEST_CASE("sphere quadrature integrates constants to the exact volume") {
  for (int n : {3, 4, 5}) {
    for (double c : {1.0, 0.7, 2.3}) {
      auto cfg = testsupport::sphere_manifold(64);
      cfg.dimension = n;
      cfg.r2_0 = c;
      auto st = initial_state(cfg);
      const double vol = integrate(cfg, st, constant_field(grid_size(cfg), 1.0));
      const double expect = sphere_surface_area(n) * std::pow(c, 0.5 * n);
      INFO("n=" << n << " c=" << c);
      CHECK(std::abs(vol - expect) <= 1e-13 * expect);
      CHECK(std::abs(analytic_volume(cfg, st) - expect) <= 1e-13 * expect);
    }
  }
}

TEST_CASE("hypersphere surface areas match the classical values") {
  CHECK(sphere_surface_area(2) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(sphere_surface_area(3) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
  CHECK(sphere_surface_area(4) == doctest::Approx(8.0 * kPi * kPi / 3.0).epsilon(1e-14));
  CHECK(sphere_surface_area(5) == doctest::Approx(kPi * kPi * kPi).epsilon(1e-14));
}

TEST_CASE("torus quadrature integrates constants to the exact volume") {
  auto cfg = testsupport::torus_manifold(32);
  cfg.torus_lengths = {2.0 * kPi, 1.5, 3.0};
  cfg.torus_metric0 = {1.3, 0.8, 2.0};
  auto st = initial_state(cfg);
  const double expect = std::sqrt(1.3 * 0.8 * 2.0) * 2.0 * kPi * 1.5 * 3.0;
  const double vol = integrate(cfg, st, constant_field(grid_size(cfg), 1.0));
  CHECK(vol == doctest::Approx(expect).epsilon(1e-13));
  CHECK(analytic_volume(cfg, st) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("factor weight products reproduce the reduced-grid measure") {
  for (auto cfg : {testsupport::torus_manifold(32), testsupport::coupled_manifold(32)}) {
    auto st = initial_state(cfg);
    const Vec w = measure_weights(cfg, st);
    REQUIRE(factor_count(cfg) == 3);
    const Vec w0 = factor_weights(cfg, st, 0);
    const double mass1 = factor_weights(cfg, st, 1).sum();
    const double mass2 = factor_weights(cfg, st, 2).sum();
    const Vec recon = w0 * mass1 * mass2;
    CHECK((w - recon).cwiseAbs().maxCoeff() <= 1e-13 * w.maxCoeff());
  }
}

TEST_CASE("weighted Laplacian is symmetric, kills constants, conserves mass") {
  auto sphere = testsupport::sphere_manifold(64, 1.7);
  auto torus = testsupport::torus_manifold(32);
  auto coupled = testsupport::coupled_manifold(32, 0.3, 0.1);
  for (const auto& cfg : {sphere, torus, coupled}) {
    auto st = initial_state(cfg);
    auto r = weighted_residuals(cfg, st);
    INFO("variant " << variant_name(cfg.variant));
    CHECK(r.asym <= 1e-12 * r.scale);
    CHECK(r.constants <= 1e-10 * r.scale);
    CHECK(r.mass <= 1e-10 * r.scale);
    // negative semidefinite up to roundoff
    CHECK(r.top_eig <= 1e-9 * r.scale);
  }
}

TEST_CASE("periodic derivatives are exact on resolved Fourier modes") {
  const int n = 32;  // power of two selects the spectral matrices
  const double L = 2.0 * kPi;
  REQUIRE(is_power_of_two(n));
  const Mat d1 = periodic_d1(n, L);
  const Mat d2 = periodic_d2(n, L);
  Vec f(n), df(n), d2f(n);
  for (int i = 0; i < n; ++i) {
    double x = L * i / n;
    f(i) = std::sin(3.0 * x);
    df(i) = 3.0 * std::cos(3.0 * x);
    d2f(i) = -9.0 * std::sin(3.0 * x);
  }
  CHECK((d1 * f - df).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((d2 * f - d2f).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("non-power-of-two grids fall back to fourth-order stencils") {
  const double L = 2.0 * kPi;
  auto worst = [&](int n) {
    const Mat d2 = periodic_d2(n, L);
    Vec f(n), d2f(n);
    for (int i = 0; i < n; ++i) {
      double x = L * i / n;
      f(i) = std::sin(3.0 * x);
      d2f(i) = -9.0 * std::sin(3.0 * x);
    }
    return (d2 * f - d2f).cwiseAbs().maxCoeff();
  };
  REQUIRE(!is_power_of_two(36));
  const double e36 = worst(36);
  const double e72 = worst(72);
  CHECK(e36 > 1e-8);  // genuinely finite order
  CHECK(e36 / e72 >= 12.0);  // ~16 for a 4th-order scheme
}

TEST_CASE("curvature of the round sphere and the linear torus") {
  auto sphere = testsupport::sphere_manifold(48, 1.6);
  sphere.dimension = 4;
  auto sst = initial_state(sphere);
  auto sc = curvature(sphere, sst);
  const double r_expect = 4.0 * 3.0 / 1.6;
  CHECK((sc.R.array() - r_expect).abs().maxCoeff() <= 1e-12 * r_expect);
  CHECK(sc.grad_phi_sq.cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((sc.S - sc.R).cwiseAbs().maxCoeff() <= 1e-15);

  auto torus = testsupport::torus_manifold(32, 2, 0.7);
  torus.torus_metric0 = {1.8, 1.0, 1.0};
  auto tst = initial_state(torus);
  auto tc = curvature(torus, tst);
  const double kappa = 2.0 * kPi * 2 / torus.torus_lengths[0];
  const double grad_expect = kappa * kappa / 1.8;
  CHECK(tc.R.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((tc.grad_phi_sq.array() - grad_expect).abs().maxCoeff() <= 1e-12 * grad_expect);
  CHECK((tc.S.array() + 0.7 * grad_expect).abs().maxCoeff() <= 1e-12 * grad_expect);
}

TEST_CASE("coupled curvature matches the closed-form twisted scalar") {
  const int n = 32;
  const double a_amp = 0.07, psi_amp = 0.04, alpha0 = 0.6;
  auto cfg = testsupport::coupled_manifold(n, a_amp, psi_amp, alpha0);
  auto st = initial_state(cfg);
  auto cv = curvature(cfg, st);
  const double kappa = 2.0 * kPi / cfg.torus_lengths[0];
  for (int i = 0; i < n; ++i) {
    double x = 2.0 * kPi * i / n;
    double a = 1.0 + a_amp * std::cos(x);
    double dphi = kappa + psi_amp * std::cos(x);
    double s_expect = -alpha0 * dphi * dphi / a;
    INFO("node " << i);
    CHECK(std::abs(cv.R(i)) <= 1e-12);
    CHECK(std::abs(cv.S(i) - s_expect) <= 1e-10);
  }
  CHECK(min_S(cfg, st) <= max_S(cfg, st));
}

TEST_CASE("zonal recurrence agrees with the 3-sphere closed form") {
  // on S^3 the degree-k zonal profile is sin((k+1)theta) / ((k+1) sin theta)
  const int kmax = 16;
  Vec x(11);
  for (int j = 0; j < 11; ++j) x(j) = std::cos(0.25 + 0.25 * j);
  const Mat table = zonal_table(3, kmax, x);
  for (int k = 0; k <= kmax; ++k) {
    for (int j = 0; j < 11; ++j) {
      double theta = std::acos(x(j));
      double expect = std::sin((k + 1) * theta) / ((k + 1) * std::sin(theta));
      INFO("k=" << k << " j=" << j);
      CHECK(std::abs(table(k, j) - expect) <= 1e-12);
    }
  }
  CHECK(zonal_eval(3, 7, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(zonal_eigenvalue(3, 5) == doctest::Approx(35.0).epsilon(1e-14));
  CHECK(zonal_multiplicity(3, 5) == doctest::Approx(36.0).epsilon(1e-14));
}

TEST_CASE("zonal harmonics are orthogonal under the cell-centered quadrature") {
  auto cfg = testsupport::sphere_manifold(64);
  auto st = initial_state(cfg);
  const Vec w = measure_weights(cfg, st);
  const Vec nodes = grid_nodes(cfg);
  Vec cosines = nodes.array().cos();
  const int kmax = 6;
  const Mat table = zonal_table(3, kmax, cosines);
  const double omega = sphere_surface_area(3);
  for (int a = 0; a <= kmax; ++a) {
    for (int b = 0; b <= kmax; ++b) {
      double ip = (w.array() * table.row(a).transpose().array() *
                   table.row(b).transpose().array())
                      .sum();
      double expect = (a == b) ? omega / zonal_multiplicity(3, a) : 0.0;
      INFO("a=" << a << " b=" << b);
      CHECK(std::abs(ip - expect) <= 1e-10 * omega);
    }
  }
}

TEST_CASE("nyquist filter removes the top band and preserves totals") {
  const int n = 16;
  Vec v(n), smooth(n);
  for (int i = 0; i < n; ++i) {
    double x = 2.0 * kPi * i / n;
    smooth(i) = 1.0 + 0.5 * std::cos(2.0 * x);
    v(i) = smooth(i) + 2.0 * ((i % 2 == 0) ? 1.0 : -1.0);
  }
  const Vec filtered = filter_nyquist_band(v);
  CHECK(std::abs(filtered.sum() - v.sum()) <= 1e-12 * std::abs(v.sum()));
  CHECK((filter_nyquist_band(smooth) - smooth).cwiseAbs().maxCoeff() <= 1e-12);
  // the alternating component sits entirely in the removed band
  CHECK((filtered - smooth).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("bad dimensions and variants are rejected") {
  auto cfg = testsupport::sphere_manifold(32);
  cfg.dimension = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
  auto torus = testsupport::torus_manifold(32);
  torus.dimension = 4;  // tori are implemented for n == 3 only
  CHECK_THROWS_AS(torus.validate(), Error);
}
