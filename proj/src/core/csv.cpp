#include "core/csv.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "core/common.hpp"
#include "core/geometry.hpp"

namespace rhflow {

namespace {

using nlohmann::json;

std::string index_token(const ManifoldConfig& cfg, const std::array<int, 3>& idx) {
  if (cfg.is_sphere()) return strprintf("%d", idx[0]);
  return strprintf("%d:%d:%d", idx[0], idx[1], idx[2]);
}

const char* solver_name(KernelSolver s) {
  return s == KernelSolver::forward_pde ? "crank_nicolson" : "eigen_sum";
}

const char* convention_name(AConvention c) {
  return c == AConvention::squared ? "squared" : "plain";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_failed, "cannot open for writing: " + path);
  out << content;
  out.close();
  if (!out) fail(Errc::io_failed, "write failed: " + path);
}

std::string trajectory_csv(const FlowTrajectory& traj) {
  const ManifoldConfig& cfg = traj.manifold();
  std::ostringstream os;
  switch (cfg.variant) {
    case Variant::round_sphere:
      os << "time,c,min_S,max_S,volume\n";
      break;
    case Variant::torus_linear:
      os << "time,A,B,C,min_S,max_S,volume\n";
      break;
    case Variant::coupled_circle:
      os << "time,A_min,A_max,psi_min,psi_max,min_S,max_S,volume\n";
      break;
  }
  for (const FlowCheckpoint& cp : traj.checkpoints()) {
    os << format_double(cp.t);
    switch (cfg.variant) {
      case Variant::round_sphere:
        os << ',' << format_double(cp.metric(0));
        break;
      case Variant::torus_linear:
        os << ',' << format_double(cp.metric(0)) << ',' << format_double(cp.metric(1)) << ','
           << format_double(cp.metric(2));
        break;
      case Variant::coupled_circle:
        os << ',' << format_double(cp.metric.minCoeff()) << ','
           << format_double(cp.metric.maxCoeff()) << ',' << format_double(cp.map.minCoeff())
           << ',' << format_double(cp.map.maxCoeff());
        break;
    }
    os << ',' << format_double(cp.min_s) << ',' << format_double(cp.max_s) << ','
       << format_double(cp.volume) << '\n';
  }
  return os.str();
}

std::string kernel_field_csv(const FlowTrajectory& traj, const KernelField& field,
                             const KernelDiagnostics& diag, const KernelParams& kp) {
  const ManifoldConfig& cfg = traj.manifold();
  json meta;
  meta["variant"] = variant_name(cfg.variant);
  meta["dimension"] = cfg.dimension;
  meta["grid"] = cfg.grid;
  meta["source"] = {field.source[0], field.source[1], field.source[2]};
  meta["source_time"] = field.source_time;
  meta["field_time"] = field.field_time;
  meta["conjugate"] = field.conjugate;
  meta["solver"] = solver_name(field.solver);
  meta["min_steps"] = kp.min_steps;
  meta["oracle_tail_tol"] = kp.oracle_tail_tol;
  meta["mollify_eps_factor"] = kp.mollify_eps_factor;
  meta["diagnostics"] = {{"J_t", diag.J_t},
                         {"Jtilde_s", diag.Jtilde_s},
                         {"P_mid", diag.P_mid},
                         {"Q_mid", diag.Q_mid},
                         {"semigroup_residual", diag.semigroup_residual},
                         {"mid_time", diag.mid_time}};
  if (!cfg.is_sphere()) meta["section"] = "x1 line through the source node";

  const GeometryState st = traj.state_at(field.field_time);
  std::ostringstream os;
  os << "# " << meta.dump() << '\n';
  if (cfg.is_sphere()) {
    const Vec theta = grid_nodes(cfg);
    const Vec w = measure_weights(cfg, st);
    os << "theta,G,weight\n";
    for (int i = 0; i < theta.size(); ++i)
      os << format_double(theta(i)) << ',' << format_double(field.profile[0](i)) << ','
         << format_double(w(i)) << '\n';
    return os.str();
  }

  std::array<Vec, 3> w;
  for (int f = 0; f < field.factors; ++f) w[f] = factor_weights(cfg, st, f);
  const int j2 = field.source[1], j3 = field.source[2];
  const double x2 = cfg.torus_lengths[1] * j2 / factor_size(cfg, 1);
  const double x3 = cfg.torus_lengths[2] * j3 / factor_size(cfg, 2);
  const double tail_g = field.profile[1](j2) * field.profile[2](j3);
  const double tail_w = w[1](j2) * w[2](j3);
  os << "x1,x2,x3,G,weight\n";
  const int n0 = factor_size(cfg, 0);
  for (int i = 0; i < n0; ++i) {
    double x1 = cfg.torus_lengths[0] * i / n0;
    os << format_double(x1) << ',' << format_double(x2) << ',' << format_double(x3) << ','
       << format_double(field.profile[0](i) * tail_g) << ','
       << format_double(w[0](i) * tail_w) << '\n';
  }
  return os.str();
}

std::string sobolev_csv(const SobolevConstants& sob) {
  std::ostringstream os;
  json meta;
  meta["K"] = sob.K;
  meta["A_convention"] = convention_name(sob.convention);
  meta["A_positive"] = sob.A_positive;
  meta["positive_case"] = sob.positive_case;
  meta["from_override"] = sob.from_override;
  os << "# " << meta.dump() << '\n';
  os << "t,A,B,lambda0,positive_case\n";
  for (size_t i = 0; i < sob.times.size(); ++i) {
    double l0 = i < sob.lambda0.size() ? sob.lambda0[i] : 0.0;
    os << format_double(sob.times[i]) << ',' << format_double(sob.A_curve[i]) << ','
       << format_double(sob.B_curve[i]) << ',' << format_double(l0) << ','
       << (sob.positive_case ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string bound_report_csv(const BoundReport& rep) {
  json meta;
  meta["variant"] = variant_name(rep.variant);
  meta["dimension"] = rep.dimension;
  meta["m0"] = rep.m0;
  meta["nonneg_case"] = rep.nonneg_case;
  meta["strict_positive"] = rep.strict_positive;
  meta["c_n"] = rep.c_n;
  meta["front_constant"] = rep.front;
  meta["corollary_plain"] = rep.corollary_plain;
  meta["corollary_squared"] = rep.corollary_squared;
  meta["K"] = rep.sobolev.K;
  meta["A_convention"] = convention_name(rep.sobolev.convention);
  meta["s_floor_ok"] = rep.s_floor_ok;
  meta["s_floor_worst"] = rep.s_floor_worst;
  meta["all_pass"] = rep.all_pass;

  // x and y are node indices: a single zonal index on the sphere, a colon
  // joined triple on the tori
  ManifoldConfig shape;
  shape.variant = rep.variant;

  std::ostringstream os;
  os << "# " << meta.dump() << '\n';
  os << "x,y,s,t,G_actual,bound_theorem,bound_corollary,ratio_theorem,ratio_corollary,"
        "m0,chi_mid,H_mid,J_t,Jtilde_s,P_mid,Q_mid,pass\n";
  for (const BoundRow& r : rep.rows) {
    os << index_token(shape, r.x) << ',' << index_token(shape, r.y) << ',' << format_double(r.s)
       << ',' << format_double(r.t) << ',' << format_double(r.g_actual) << ','
       << format_double(r.bound_theorem) << ',' << format_double(r.bound_corollary) << ','
       << format_double(r.ratio_theorem) << ',' << format_double(r.ratio_corollary) << ','
       << format_double(r.m0) << ',' << format_double(r.chi_mid) << ',' << format_double(r.h_mid)
       << ',' << format_double(r.j_t) << ',' << format_double(r.jtilde_s) << ','
       << format_double(r.p_mid) << ',' << format_double(r.q_mid) << ',' << (r.pass ? 1 : 0)
       << '\n';
  }
  return os.str();
}

}  // namespace rhflow
