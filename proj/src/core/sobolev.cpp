#include "core/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/common.hpp"
#include "core/geometry.hpp"
#include "core/zonal.hpp"

namespace rhflow {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Weighted stiffness of factor f: quadratic form of the Dirichlet energy along
// that coordinate. Symmetrized so roundoff cannot leak an antisymmetric part
// into the quadratic form.
Mat factor_stiffness(const ManifoldConfig& cfg, const GeometryState& st, int f) {
  Mat op;
  if (factor_coef_is_scalar(cfg, f)) {
    op = factor_base_matrix(cfg, f) / factor_scalar_coef(cfg, st, f);
  } else {
    op = coupled_x1_operator(cfg, st);
  }
  Vec w = factor_weights(cfg, st, f);
  Mat wop = w.asDiagonal() * op;
  return -0.5 * (wop + wop.transpose());
}

struct ProbeTerms {
  Vec energy;  // integral of |grad v|^2 + S v^2 / 4
  Vec mass;    // integral of v^2
  Vec lhs;     // (integral of |v|^p)^{2/p}, p = 2n/(n-2)
};

ProbeTerms evaluate_probe_terms(const ManifoldConfig& cfg, const GeometryState& st,
                                const std::vector<Probe>& probes) {
  const int nf = factor_count(cfg);
  const double n = cfg.dimension;
  const double p_exp = 2.0 * n / (n - 2.0);
  const CurvatureData cd = curvature(cfg, st);

  std::array<Vec, 3> w;
  std::array<Mat, 3> stiff;
  for (int f = 0; f < nf; ++f) {
    w[f] = factor_weights(cfg, st, f);
    stiff[f] = factor_stiffness(cfg, st, f);
  }

  const int np = static_cast<int>(probes.size());
  ProbeTerms out;
  out.energy.resize(np);
  out.mass.resize(np);
  out.lhs.resize(np);

  for (int i = 0; i < np; ++i) {
    const Probe& pr = probes[i];
    if (pr.factors != nf) fail(Errc::bad_config, "probe factor count does not match the model");
    std::array<double, 3> m2{1.0, 1.0, 1.0};
    std::array<double, 3> mp{1.0, 1.0, 1.0};
    std::array<double, 3> dir{0.0, 0.0, 0.0};
    for (int f = 0; f < nf; ++f) {
      const Vec& v = pr.profile[f];
      if (v.size() != w[f].size()) fail(Errc::bad_config, "probe profile size does not match the grid");
      m2[f] = (w[f].array() * v.array().square()).sum();
      mp[f] = (w[f].array() * v.array().abs().pow(p_exp)).sum();
      dir[f] = v.dot(stiff[f] * v);
    }
    double dirichlet = 0.0;
    for (int f = 0; f < nf; ++f) {
      double cross = 1.0;
      for (int g = 0; g < nf; ++g)
        if (g != f) cross *= m2[g];
      dirichlet += dir[f] * cross;
    }
    // S lives on the factor-0 grid (reduced coordinate); constant transverse
    const Vec& v0 = pr.profile[0];
    double s_quad = (w[0].array() * cd.S.array() * v0.array().square()).sum();
    for (int g = 1; g < nf; ++g) s_quad *= m2[g];

    double mass = 1.0, pprod = 1.0;
    for (int f = 0; f < nf; ++f) {
      mass *= m2[f];
      pprod *= mp[f];
    }
    out.energy(i) = dirichlet + 0.25 * s_quad;
    out.mass(i) = mass;
    out.lhs(i) = std::pow(pprod, 2.0 / p_exp);
  }
  return out;
}

void sup_normalize(Vec& v) {
  double m = v.cwiseAbs().maxCoeff();
  if (m < 1e-12) {
    v.setOnes();
  } else {
    v /= m;
  }
}

std::vector<Probe> sphere_probes(const ManifoldConfig& cfg, Rng& rng) {
  const int N = factor_size(cfg, 0);
  const Vec theta = grid_nodes(cfg);
  const Vec x = theta.array().cos();
  const Mat Z = zonal_table(cfg.dimension, 8, x);

  std::vector<Probe> out;
  auto push = [&](Vec v, std::string label) {
    Probe p;
    p.factors = 1;
    sup_normalize(v);
    p.profile[0] = std::move(v);
    p.label = std::move(label);
    out.push_back(std::move(p));
  };

  for (int k = 0; k <= 7; ++k) push(Z.row(k).transpose(), strprintf("harmonic-%d", k));

  for (int r = 0; r < 40; ++r) {
    Vec v = Vec::Zero(N);
    for (int k = 0; k <= 8; ++k) v += (rng.normal() / (1.0 + k * k)) * Z.row(k).transpose();
    push(std::move(v), strprintf("random-%02d", r));
  }

  const double sigma_min = 4.0 * kPi / N;
  for (int b = 0; b < 16; ++b) {
    double sigma = std::max(sigma_min, 0.25 * kPi * std::pow(2.0, -0.5 * b));
    Vec v = (-(theta.array() / sigma).square()).exp();
    push(std::move(v), strprintf("bump-%02d", b));
  }
  return out;
}

std::vector<Probe> torus_probes(const ManifoldConfig& cfg, Rng& rng) {
  const int nf = factor_count(cfg);
  std::array<Vec, 3> nodes;
  std::array<double, 3> len;
  for (int f = 0; f < nf; ++f) {
    const int N = factor_size(cfg, f);
    len[f] = cfg.torus_lengths[static_cast<size_t>(f)];
    nodes[f].resize(N);
    for (int i = 0; i < N; ++i) nodes[f](i) = len[f] * i / N;
  }

  std::vector<Probe> out;
  auto blank = [&]() {
    Probe p;
    p.factors = nf;
    for (int f = 0; f < nf; ++f) p.profile[f] = Vec::Ones(factor_size(cfg, f));
    return p;
  };
  auto mode = [&](int f, int m, bool sine) {
    Vec v(factor_size(cfg, f));
    for (int i = 0; i < v.size(); ++i) {
      double a = 2.0 * kPi * m * nodes[f](i) / len[f];
      v(i) = sine ? std::sin(a) : std::cos(a);
    }
    return v;
  };

  {
    Probe p = blank();
    p.label = "harmonic-const";
    out.push_back(p);
    for (int f = 0; f < nf; ++f) {
      p = blank();
      p.profile[f] = mode(f, 1, false);
      p.label = strprintf("harmonic-cos1-x%d", f + 1);
      out.push_back(p);
    }
    p = blank();
    p.profile[0] = mode(0, 1, true);
    p.label = "harmonic-sin1-x1";
    out.push_back(p);
    p = blank();
    p.profile[0] = mode(0, 2, false);
    p.label = "harmonic-cos2-x1";
    out.push_back(p);
    p = blank();
    p.profile[0] = mode(0, 1, false);
    p.profile[1] = mode(1, 1, false);
    p.label = "harmonic-cos1-x1x2";
    out.push_back(p);
    p = blank();
    for (int f = 0; f < nf; ++f) p.profile[f] = mode(f, 1, false);
    p.label = "harmonic-cos1-all";
    out.push_back(p);
  }

  for (int r = 0; r < 40; ++r) {
    Probe p = blank();
    for (int f = 0; f < nf; ++f) {
      Vec v = Vec::Constant(factor_size(cfg, f), rng.normal());
      for (int m = 1; m <= 6; ++m) {
        double ca = rng.normal() / (1.0 + m * m);
        double sa = rng.normal() / (1.0 + m * m);
        v += ca * mode(f, m, false) + sa * mode(f, m, true);
      }
      sup_normalize(v);
      p.profile[f] = std::move(v);
    }
    p.label = strprintf("random-%02d", r);
    out.push_back(std::move(p));
  }

  const std::array<double, 4> center_frac{0.0, 0.5, 0.25, 0.75};
  for (int b = 0; b < 16; ++b) {
    Probe p = blank();
    for (int f = 0; f < nf; ++f) {
      const int N = factor_size(cfg, f);
      double h = len[f] / N;
      double sigma = std::max(4.0 * h, 0.125 * len[f] * std::pow(2.0, -0.5 * b));
      double center = center_frac[static_cast<size_t>(b % 4)] * len[f];
      Vec v(N);
      for (int i = 0; i < N; ++i) {
        double d = std::remainder(nodes[f](i) - center, len[f]);
        v(i) = std::exp(-(d / sigma) * (d / sigma));
      }
      p.profile[f] = std::move(v);
    }
    p.label = strprintf("bump-%02d", b);
    out.push_back(std::move(p));
  }
  return out;
}

double interp_curve(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
  if (t <= ts.front()) return vs.front();
  if (t >= ts.back()) return vs.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t j = static_cast<size_t>(it - ts.begin());
  double t0 = ts[j - 1], t1 = ts[j];
  double u = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
  return (1.0 - u) * vs[j - 1] + u * vs[j];
}

}  // namespace

double talenti_constant(int n) {
  if (n < 3) fail(Errc::bad_dimension, strprintf("talenti_constant: need n >= 3, got %d", n));
  const double nn = n;
  // extremal radial profile (1 + r^2)^{-(n-2)/2}: both norms are Beta integrals
  const double log_shell = std::log(0.5 * sphere_surface_area(n - 1));
  const double log_num = log_shell + log_beta(0.5 * nn, 0.5 * nn);
  const double log_den =
      log_shell + 2.0 * std::log(nn - 2.0) + log_beta(0.5 * nn + 1.0, 0.5 * nn - 1.0);
  return std::exp((nn - 2.0) / (2.0 * nn) * log_num - 0.5 * log_den);
}

double lambda0_alpha(const ManifoldConfig& cfg, const GeometryState& st, Vec* eigvec) {
  const Vec W = measure_weights(cfg, st);
  const Mat L = laplacian_matrix(cfg, st);
  Mat wl = W.asDiagonal() * L;
  Mat quad = -2.0 * (wl + wl.transpose());  // 4 * symmetrized stiffness
  const CurvatureData cd = curvature(cfg, st);
  quad.diagonal() += (W.array() * cd.S.array()).matrix();

  Mat mass = Mat::Zero(W.size(), W.size());
  mass.diagonal() = W;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(quad, mass);
  if (es.info() != Eigen::Success)
    fail(Errc::eigensolve_failed, "generalized eigensolve did not converge");
  if (eigvec) *eigvec = es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

std::vector<Probe> build_probe_suite(const ManifoldConfig& cfg, unsigned long long seed) {
  Rng rng(seed);
  return cfg.is_sphere() ? sphere_probes(cfg, rng) : torus_probes(cfg, rng);
}

double probe_inequality(const ManifoldConfig& cfg, const GeometryState& st, double A, double B,
                        const std::vector<Probe>& probes) {
  if (probes.empty()) fail(Errc::empty_probe_set, "probe inequality needs at least one probe");
  const ProbeTerms terms = evaluate_probe_terms(cfg, st, probes);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < terms.energy.size(); ++i)
    worst = std::min(worst, A * terms.energy(i) + B * terms.mass(i) - terms.lhs(i));
  return worst;
}

double SobolevConstants::A_at(double t) const {
  if (A_curve.empty()) fail(Errc::bad_config, "Sobolev A curve is empty");
  return interp_curve(times, A_curve, t);
}

double SobolevConstants::B_at(double t) const {
  if (B_curve.empty()) fail(Errc::bad_config, "Sobolev B curve is empty");
  return interp_curve(times, B_curve, t);
}

SobolevConstants estimate_AB(const FlowTrajectory& traj, const std::vector<double>& times,
                             const SobolevParams& sp, unsigned long long seed) {
  const ManifoldConfig& cfg = traj.manifold();
  SobolevConstants out;
  out.K = talenti_constant(cfg.dimension);
  out.convention = sp.convention;
  out.A_positive = (sp.convention == AConvention::squared) ? out.K * out.K : out.K;
  out.positive_case = traj.inf_S0() > 0.0;

  if (!sp.override_curve.empty()) {
    out.from_override = true;
    auto rows = sp.override_curve;
    std::sort(rows.begin(), rows.end(),
              [](const std::array<double, 3>& a, const std::array<double, 3>& b) { return a[0] < b[0]; });
    for (const auto& row : rows) {
      out.times.push_back(row[0]);
      out.A_curve.push_back(row[1]);
      out.B_curve.push_back(row[2]);
      double tc = std::clamp(row[0], 0.0, traj.t_end());
      out.lambda0.push_back(lambda0_alpha(cfg, traj.state_at(tc), nullptr));
    }
    return out;
  }

  std::vector<double> ts = times;
  if (ts.empty()) {
    int m = std::max(2, sp.n_slices_default);
    for (int i = 0; i < m; ++i) ts.push_back(traj.t_end() * i / (m - 1));
  }
  std::sort(ts.begin(), ts.end());
  out.times = ts;
  for (double t : ts) out.lambda0.push_back(lambda0_alpha(cfg, traj.state_at(t), nullptr));

  if (out.positive_case) {
    out.A_curve.assign(ts.size(), out.A_positive);
    out.B_curve.assign(ts.size(), 0.0);
    return out;
  }

  const std::vector<Probe> probes = build_probe_suite(cfg, seed);

  // A from the initial slice: smallest constant passing the concentrating
  // probes alone at B = 0. Only bumps with positive energy can bracket.
  const GeometryState st0 = traj.state_at(0.0);
  const ProbeTerms terms0 = evaluate_probe_terms(cfg, st0, probes);
  std::vector<int> bump_idx;
  for (size_t i = 0; i < probes.size(); ++i)
    if (probes[i].label.rfind("bump", 0) == 0 && terms0.energy(static_cast<int>(i)) > 0.0)
      bump_idx.push_back(static_cast<int>(i));
  if (bump_idx.empty())
    fail(Errc::bisection_failed, "no concentrating probe with positive energy on the initial slice");

  auto worst_at_A = [&](double A) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i : bump_idx) worst = std::min(worst, A * terms0.energy(i) - terms0.lhs(i));
    return worst;
  };
  double lo = 0.0, hi = out.A_positive;
  for (int guard = 0; worst_at_A(hi) < 0.0; ++guard) {
    if (guard > 60) fail(Errc::bisection_failed, "could not bracket the Sobolev A constant");
    hi *= 2.0;
  }
  while (hi - lo > sp.bisect_rtol * hi) {
    double mid = 0.5 * (lo + hi);
    (worst_at_A(mid) >= 0.0 ? hi : lo) = mid;
  }
  const double a_star = hi;

  for (double t : ts) {
    const ProbeTerms terms =
        (t == 0.0) ? terms0 : evaluate_probe_terms(cfg, traj.state_at(t), probes);
    auto worst_at_B = [&](double B) {
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < terms.energy.size(); ++i)
        worst = std::min(worst, a_star * terms.energy(i) + B * terms.mass(i) - terms.lhs(i));
      return worst;
    };
    double b = 0.0;
    if (worst_at_B(0.0) < 0.0) {
      double bl = 0.0, bh = 1.0;
      for (int guard = 0; worst_at_B(bh) < 0.0; ++guard) {
        if (guard > 80) fail(Errc::bisection_failed, "could not bracket the Sobolev B constant");
        bh *= 2.0;
      }
      while (bh - bl > sp.bisect_rtol * bh) {
        double mid = 0.5 * (bl + bh);
        (worst_at_B(mid) >= 0.0 ? bh : bl) = mid;
      }
      b = bh;
    }
    out.A_curve.push_back(a_star);
    out.B_curve.push_back(b);
  }
  return out;
}

}  // namespace rhflow
