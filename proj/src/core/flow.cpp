#include "core/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "core/common.hpp"
#include "core/quadrature.hpp"

namespace rhflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

struct Deriv {
  Vec dmetric;
  Vec dmap;
};

// Right-hand side of the coupled system. For the sphere and the linear torus
// the metric satisfies scalar ODEs; the coupled variant is a method-of-lines
// discretization with a precomputed periodic derivative matrix.
class FlowRhs {
 public:
  FlowRhs(const ManifoldConfig& cfg, bool freeze) : cfg_(cfg), freeze_(freeze) {
    if (cfg.variant != Variant::round_sphere)
      kappa_ = 2.0 * kPi * cfg.winding / cfg.torus_lengths[0];
    if (cfg.variant == Variant::coupled_circle)
      d1_ = periodic_d1(cfg.grid, cfg.torus_lengths[0]);
  }

  Deriv operator()(double t, const Vec& metric, const Vec& map) const {
    Deriv d;
    d.dmetric = Vec::Zero(metric.size());
    d.dmap = Vec::Zero(map.size());
    if (freeze_) return d;
    double alpha = cfg_.coupling.value(t);
    switch (cfg_.variant) {
      case Variant::round_sphere:
        d.dmetric[0] = -2.0 * (cfg_.dimension - 1);
        break;
      case Variant::torus_linear:
        d.dmetric[0] = 2.0 * alpha * kappa_ * kappa_;
        break;
      case Variant::coupled_circle: {
        Vec phi_prime = d1_ * map;
        phi_prime.array() += kappa_;
        Vec inv_sqrt_a(metric.size());
        for (int i = 0; i < metric.size(); ++i) {
          if (!(metric[i] > 0.0)) fail(Errc::degenerate_metric, "A sample <= 0 inside a step");
          inv_sqrt_a[i] = 1.0 / std::sqrt(metric[i]);
          d.dmetric[i] = 2.0 * alpha * phi_prime[i] * phi_prime[i];
        }
        Vec flux = inv_sqrt_a.cwiseProduct(phi_prime);
        d.dmap = inv_sqrt_a.cwiseProduct(d1_ * flux);
        break;
      }
    }
    return d;
  }

 private:
  const ManifoldConfig& cfg_;
  bool freeze_;
  double kappa_ = 0.0;
  Mat d1_;
};

double error_norm(const Vec& e, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double acc = 0.0;
  for (int i = 0; i < e.size(); ++i) {
    double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double q = e[i] / scale;
    acc += q * q;
  }
  return std::sqrt(acc / std::max<Eigen::Index>(1, e.size()));
}

FlowCheckpoint make_checkpoint(const ManifoldConfig& cfg, const FlowRhs& rhs, double t,
                               const Vec& metric, const Vec& map) {
  FlowCheckpoint cp;
  cp.t = t;
  cp.metric = metric;
  cp.map = map;
  Deriv d = rhs(t, metric, map);
  cp.dmetric = d.dmetric;
  cp.dmap = d.dmap;
  GeometryState st{t, metric, map};
  CurvatureData cd = curvature(cfg, st);
  cp.min_s = cd.S.minCoeff();
  cp.max_s = cd.S.maxCoeff();
  cp.volume = measure_weights(cfg, st).sum();
  return cp;
}

void guard_degeneracy(const FlowParams& params, double t, const Vec& metric,
                      double initial_floor) {
  double floor = params.degeneracy_rel_floor * initial_floor;
  if (metric.minCoeff() <= floor)
    fail(Errc::degenerate_metric,
         strprintf("metric degenerated at t = %.12g (min entry %.3g)", t, metric.minCoeff()));
}

// explicit stability ceiling for the coupled method-of-lines system
double cfl_dt(const ManifoldConfig& cfg, const FlowParams& params, const Vec& metric) {
  if (cfg.variant != Variant::coupled_circle) return std::numeric_limits<double>::infinity();
  double max_inv_a = 1.0 / metric.minCoeff();
  double k_max = kPi * cfg.grid / cfg.torus_lengths[0];
  double lambda = max_inv_a * k_max * k_max;
  return params.cfl_safety * 2.8 / lambda;
}

}  // namespace

bool has_closed_form(const ManifoldConfig& cfg) {
  return cfg.variant != Variant::coupled_circle;
}

GeometryState closed_form_state(const ManifoldConfig& cfg, double t) {
  GeometryState out;
  out.t = t;
  switch (cfg.variant) {
    case Variant::round_sphere: {
      double c = cfg.r2_0 - 2.0 * (cfg.dimension - 1) * t;
      if (!(c > 0.0))
        fail(Errc::past_degeneracy, strprintf("sphere collapses before t = %.12g", t));
      out.metric = Vec::Constant(1, c);
      return out;
    }
    case Variant::torus_linear: {
      double kappa = 2.0 * kPi * cfg.winding / cfg.torus_lengths[0];
      out.metric = Vec(3);
      out.metric[0] = cfg.torus_metric0[0] + 2.0 * kappa * kappa * cfg.coupling.integral(t);
      out.metric[1] = cfg.torus_metric0[1];
      out.metric[2] = cfg.torus_metric0[2];
      return out;
    }
    case Variant::coupled_circle:
      fail(Errc::unsupported_variant, "no closed form for the coupled variant");
  }
  fail(Errc::unsupported_variant, "closed_form_state");
}

FlowTrajectory run_flow(const ManifoldConfig& manifold, const FlowParams& params) {
  manifold.validate();
  params.validate();
  FlowRhs rhs(manifold, params.freeze);
  GeometryState init = initial_state(manifold);
  Vec metric = init.metric;
  Vec map = init.map.size() ? init.map : Vec::Zero(0);
  double initial_floor = metric.minCoeff();
  if (!(initial_floor > 0.0)) fail(Errc::non_positive_metric, "initial metric must be positive");

  std::vector<FlowCheckpoint> cps;
  cps.push_back(make_checkpoint(manifold, rhs, 0.0, metric, map));

  if (params.freeze) {
    cps.push_back(make_checkpoint(manifold, rhs, params.t_end, metric, map));
    return FlowTrajectory(manifold, params, std::move(cps));
  }

  // integrate segment by segment so schedule kinks land on step boundaries
  std::vector<double> ends = manifold.coupling.kink_times(params.t_end);
  ends.push_back(params.t_end);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-15; }),
             ends.end());

  double t = 0.0;
  long accepted = 0;
  for (double seg_end : ends) {
    if (seg_end <= t + 1e-15) continue;
    if (params.integrator == Integrator::rk4) {
      double h_target = std::min(params.dt, cfl_dt(manifold, params, metric));
      long steps = std::max<long>(1, static_cast<long>(std::ceil((seg_end - t) / h_target)));
      double h = (seg_end - t) / steps;
      for (long i = 0; i < steps; ++i) {
        Deriv k1 = rhs(t, metric, map);
        Deriv k2 = rhs(t + 0.5 * h, metric + 0.5 * h * k1.dmetric, map + 0.5 * h * k1.dmap);
        Deriv k3 = rhs(t + 0.5 * h, metric + 0.5 * h * k2.dmetric, map + 0.5 * h * k2.dmap);
        Deriv k4 = rhs(t + h, metric + h * k3.dmetric, map + h * k3.dmap);
        metric += (h / 6.0) * (k1.dmetric + 2.0 * k2.dmetric + 2.0 * k3.dmetric + k4.dmetric);
        map += (h / 6.0) * (k1.dmap + 2.0 * k2.dmap + 2.0 * k3.dmap + k4.dmap);
        t = (i + 1 == steps) ? seg_end : t + h;
        guard_degeneracy(params, t, metric, initial_floor);
        ++accepted;
        if (accepted % params.checkpoint_stride == 0 && t < seg_end)
          cps.push_back(make_checkpoint(manifold, rhs, t, metric, map));
      }
    } else {
      // Dormand-Prince 5(4)
      static const double a[6][6] = {
          {1.0 / 5, 0, 0, 0, 0, 0},
          {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
          {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
          {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
          {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
          {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
      static const double c[6] = {1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
      static const double e[7] = {71.0 / 57600,      0.0,        -71.0 / 16695, 71.0 / 1920,
                                  -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
      // weights of the pair's 4th-order continuous extension; used to bound
      // the cubic Hermite bridge that state_at() builds across each step
      static const double d[7] = {-12715105075.0 / 11282082432.0,
                                  0.0,
                                  87487479700.0 / 32700410799.0,
                                  -10690763975.0 / 1880347072.0,
                                  701980252875.0 / 199316789632.0,
                                  -1453857185.0 / 822651844.0,
                                  69997945.0 / 29380423.0};
      // fraction of the local tolerance granted to interpolation error
      constexpr double kDenseBudget = 0.2;
      double h = std::min({params.dt, cfl_dt(manifold, params, metric), seg_end - t});
      int rejects = 0;
      while (t < seg_end - 1e-15) {
        h = std::min(h, seg_end - t);
        if (h < 1e-14 * std::max(1.0, params.t_end))
          fail(Errc::step_rejected_limit, "adaptive step collapsed");
        Deriv k[7];
        k[0] = rhs(t, metric, map);
        for (int s = 0; s < 6; ++s) {
          Vec m = metric;
          Vec p = map;
          for (int j = 0; j <= s; ++j) {
            if (a[s][j] == 0.0) continue;
            m += h * a[s][j] * k[j].dmetric;
            p += h * a[s][j] * k[j].dmap;
          }
          k[s + 1] = rhs(t + c[s] * h, m, p);
        }
        // stage 7 state is already the 5th-order solution
        Vec metric_new = metric;
        Vec map_new = map;
        for (int j = 0; j < 6; ++j) {
          if (a[5][j] == 0.0) continue;
          metric_new += h * a[5][j] * k[j].dmetric;
          map_new += h * a[5][j] * k[j].dmap;
        }
        Vec err_m = Vec::Zero(metric.size());
        Vec err_p = Vec::Zero(map.size());
        for (int j = 0; j < 7; ++j) {
          if (e[j] == 0.0) continue;
          err_m += h * e[j] * k[j].dmetric;
          err_p += h * e[j] * k[j].dmap;
        }
        Vec err(err_m.size() + err_p.size());
        err << err_m, err_p;
        Vec y0(err.size()), y1(err.size());
        y0 << metric, map;
        y1 << metric_new, map_new;
        double en = error_norm(err, y0, y1, params.rtol, params.atol);

        // Dense-output control: the trajectory only stores step endpoints, so
        // state_at() bridges the step with a cubic Hermite. Its midpoint
        // deviation from the continuous extension estimates the interpolation
        // error; steps that would leave an out-of-tolerance bridge shrink,
        // exactly like an ordinary error rejection.
        Vec kd_m = Vec::Zero(metric.size());
        Vec kd_p = Vec::Zero(map.size());
        for (int j = 0; j < 7; ++j) {
          if (d[j] == 0.0) continue;
          kd_m += d[j] * k[j].dmetric;
          kd_p += d[j] * k[j].dmap;
        }
        Vec f0(err.size()), f1(err.size()), kd(err.size());
        f0 << k[0].dmetric, k[0].dmap;
        f1 << k[6].dmetric, k[6].dmap;
        kd << kd_m, kd_p;
        Vec dy = y1 - y0;
        Vec r3 = h * f0 - dy;
        Vec r4 = dy - h * f1 - r3;
        Vec bridge = 0.125 * h * (f0 - f1) - 0.25 * r3 - 0.125 * r4 - 0.0625 * h * kd;
        double en_dense =
            error_norm(bridge, y0, y1, params.rtol, params.atol) / kDenseBudget;

        double f5 = (en > 0.0) ? 0.9 * std::pow(en, -0.2) : 5.0;
        double f4 = (en_dense > 0.0) ? 0.9 * std::pow(en_dense, -0.25) : 5.0;
        double factor = std::clamp(std::min(f5, f4), 0.2, 5.0);
        if (en <= 1.0 && en_dense <= 1.0) {
          metric = metric_new;
          map = map_new;
          t += h;
          if (seg_end - t < 1e-14 * std::max(1.0, params.t_end)) t = seg_end;
          guard_degeneracy(params, t, metric, initial_floor);
          ++accepted;
          rejects = 0;
          // every accepted step becomes a record: adaptive steps are the
          // intervals the interpolation error was just controlled on
          if (t < seg_end) cps.push_back(make_checkpoint(manifold, rhs, t, metric, map));
          h *= factor;
        } else {
          if (++rejects > params.max_rejects)
            fail(Errc::step_rejected_limit, "too many consecutive step rejections");
          h *= factor;
        }
        h = std::min(h, cfl_dt(manifold, params, metric));
      }
    }
    cps.push_back(make_checkpoint(manifold, rhs, seg_end, metric, map));
  }
  return FlowTrajectory(manifold, params, std::move(cps));
}

FlowTrajectory::FlowTrajectory(ManifoldConfig manifold, FlowParams params,
                               std::vector<FlowCheckpoint> checkpoints)
    : manifold_(std::move(manifold)), params_(std::move(params)),
      checkpoints_(std::move(checkpoints)) {
  if (checkpoints_.size() < 2) fail(Errc::bad_config, "trajectory needs at least two checkpoints");
}

GeometryState FlowTrajectory::state_at(double t) const {
  double t0 = checkpoints_.front().t;
  double t1 = checkpoints_.back().t;
  double slack = 1e-12 * std::max(1.0, t1);
  if (t < t0 - slack || t > t1 + slack)
    fail(Errc::bad_time_order, strprintf("time %.12g outside [%.12g, %.12g]", t, t0, t1));
  t = std::clamp(t, t0, t1);
  auto it = std::upper_bound(checkpoints_.begin(), checkpoints_.end(), t,
                             [](double v, const FlowCheckpoint& cp) { return v < cp.t; });
  size_t hi = std::min<size_t>(checkpoints_.size() - 1,
                               static_cast<size_t>(it - checkpoints_.begin()));
  if (hi == 0) hi = 1;
  const FlowCheckpoint& a = checkpoints_[hi - 1];
  const FlowCheckpoint& b = checkpoints_[hi];
  double dt = b.t - a.t;
  GeometryState st;
  st.t = t;
  if (dt <= 0.0) {
    st.metric = b.metric;
    st.map = b.map;
    return st;
  }
  double x = (t - a.t) / dt;
  double h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
  double h10 = x * (1.0 - x) * (1.0 - x);
  double h01 = x * x * (3.0 - 2.0 * x);
  double h11 = x * x * (x - 1.0);
  st.metric = h00 * a.metric + (h10 * dt) * a.dmetric + h01 * b.metric + (h11 * dt) * b.dmetric;
  if (a.map.size())
    st.map = h00 * a.map + (h10 * dt) * a.dmap + h01 * b.map + (h11 * dt) * b.dmap;
  return st;
}

double FlowTrajectory::min_S_at(double t) const { return min_S(manifold_, state_at(t)); }

bool FlowTrajectory::spatially_constant_S() const {
  return manifold_.variant != Variant::coupled_circle;
}

double FlowTrajectory::scalar_S_at(double t) const {
  if (!spatially_constant_S())
    fail(Errc::unsupported_variant, "reaction term is not spatially constant");
  GeometryState st = state_at(t);
  if (manifold_.variant == Variant::round_sphere)
    return manifold_.dimension * (manifold_.dimension - 1) / st.metric[0];
  double kappa = 2.0 * kPi * manifold_.winding / manifold_.torus_lengths[0];
  return -manifold_.coupling.value(t) * kappa * kappa / st.metric[0];
}

double FlowTrajectory::inv_coef_integral(int factor, double s, double t) const {
  if (!factor_coef_is_scalar(manifold_, factor))
    fail(Errc::unsupported_variant, "factor has no scalar diffusion coefficient");
  if (manifold_.variant == Variant::coupled_circle) return t - s;  // flat directions
  auto f = [&](double tau) {
    GeometryState st = state_at(tau);
    return 1.0 / st.metric[manifold_.is_sphere() ? 0 : factor];
  };
  QuadratureOptions opt;
  opt.abs_tol = 1e-12 * std::max(1.0, std::abs(t - s) * f(s));
  return adaptive_simpson(f, s, t, opt);
}

double FlowTrajectory::mean_S_integral(double s, double t) const {
  auto f = [&](double tau) { return scalar_S_at(tau); };
  QuadratureOptions opt;
  opt.abs_tol = 1e-12 * std::max(1.0, std::abs((t - s) * scalar_S_at(s)));
  return adaptive_simpson(f, s, t, opt);
}

}  // namespace rhflow
