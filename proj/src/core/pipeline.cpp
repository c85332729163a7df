#include "core/pipeline.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <filesystem>

#include "core/common.hpp"
#include "core/geometry.hpp"

namespace rhflow {

namespace {

namespace fs = std::filesystem;

std::string output_path(const RunConfig& cfg, const char* name) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) fail(Errc::io_failed, "cannot create output directory: " + cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

std::string sample_token(const ManifoldConfig& cfg, const std::array<int, 3>& idx) {
  if (cfg.is_sphere()) return strprintf("%d", idx[0]);
  return strprintf("%d:%d:%d", idx[0], idx[1], idx[2]);
}

}  // namespace

void set_thread_cap(int threads) {
  Eigen::setNbThreads(std::max(1, threads));
}

FlowRunResult run_flow_pipeline(const RunConfig& cfg) {
  FlowRunResult out;
  FlowTrajectory traj = run_flow(cfg.manifold, cfg.flow);
  out.csv_path = output_path(cfg, "trajectory.csv");
  write_text_file(out.csv_path, trajectory_csv(traj));
  for (const FlowCheckpoint& cp : traj.checkpoints())
    out.lines.push_back("t=" + format_double(cp.t) + " min_S=" + format_double(cp.min_s) +
                        " max_S=" + format_double(cp.max_s) +
                        " volume=" + format_double(cp.volume));
  out.trajectory = std::make_shared<const FlowTrajectory>(std::move(traj));
  return out;
}

KernelRunResult run_kernel_pipeline(const RunConfig& cfg, const FlowTrajectory& traj,
                                    const std::array<int, 3>& source, double s, double t) {
  if (!(s < t)) fail(Errc::bad_time_order, "kernel query needs s < t");
  KernelRunResult out;
  const double mid = 0.5 * (s + t);
  ForwardKernelResult fwd = forward_solve(traj, source, s, t, cfg.kernel, mid);
  out.diag = kernel_diagnostics(traj, source, source, s, t, cfg.kernel);
  out.csv_path = output_path(cfg, "kernel.csv");
  write_text_file(out.csv_path, kernel_field_csv(traj, fwd.at_end, out.diag, cfg.kernel));

  out.lines.push_back("G=" + format_double(out.diag.G_fwd) + " J_t=" + format_double(out.diag.J_t) +
                      " Jtilde_s=" + format_double(out.diag.Jtilde_s) +
                      " P_mid=" + format_double(out.diag.P_mid) +
                      " Q_mid=" + format_double(out.diag.Q_mid) +
                      " semigroup_residual=" + format_double(out.diag.semigroup_residual));
  if (has_kernel_oracle(traj.manifold())) {
    KernelField oracle = oracle_kernel(traj, source, s, t, cfg.kernel);
    out.oracle_checked = true;
    // compare_linf already normalizes by the oracle's maximum
    out.oracle_linf_rel = compare_linf(fwd.at_end, oracle);
    out.lines.push_back("oracle_linf_rel=" + format_double(out.oracle_linf_rel));
  }
  return out;
}

SobolevRunResult run_sobolev_pipeline(const RunConfig& cfg, const FlowTrajectory& traj,
                                      const std::vector<double>& times_override) {
  SobolevRunResult out;
  const std::vector<double>& times = times_override.empty() ? cfg.sobolev.times : times_override;
  out.constants = estimate_AB(traj, times, cfg.sobolev, cfg.seed);
  out.csv_path = output_path(cfg, "sobolev.csv");
  write_text_file(out.csv_path, sobolev_csv(out.constants));
  for (size_t i = 0; i < out.constants.times.size(); ++i)
    out.lines.push_back("t=" + format_double(out.constants.times[i]) +
                        " A=" + format_double(out.constants.A_curve[i]) +
                        " B=" + format_double(out.constants.B_curve[i]) +
                        " lambda0=" + format_double(out.constants.lambda0[i]));
  return out;
}

VerifyRunResult run_verify_pipeline(const RunConfig& cfg, const FlowTrajectory& traj) {
  VerifyRunResult out;
  out.constants = estimate_AB(traj, cfg.sobolev.times, cfg.sobolev, cfg.seed);
  out.report = verify_bounds(traj, out.constants, cfg.samples, cfg.kernel);
  out.csv_path = output_path(cfg, "bounds.csv");
  write_text_file(out.csv_path, bound_report_csv(out.report));

  for (const BoundRow& r : out.report.rows) {
    std::string line = "x=" + sample_token(cfg.manifold, r.x) +
                       " y=" + sample_token(cfg.manifold, r.y) + " s=" + format_double(r.s) +
                       " t=" + format_double(r.t) + " G=" + format_double(r.g_actual) +
                       " bound=" + format_double(r.bound_theorem) +
                       " ratio=" + format_double(r.ratio_theorem) +
                       " pass=" + (r.pass ? std::string("1") : std::string("0"));
    out.lines.push_back(line);
    if (!r.pass) out.fail_lines.push_back(line);
  }
  if (!out.report.s_floor_ok)
    out.fail_lines.push_back("S floor violated: worst margin " +
                             format_double(out.report.s_floor_worst));
  return out;
}

ReportRunResult run_report_pipeline(const RunConfig& cfg) {
  ReportRunResult out;
  FlowRunResult flow = run_flow_pipeline(cfg);
  SobolevRunResult sob = run_sobolev_pipeline(cfg, *flow.trajectory, {});
  VerifyRunResult ver = run_verify_pipeline(cfg, *flow.trajectory);

  std::string summary;
  summary += "== trajectory ==\n";
  summary += trajectory_csv(*flow.trajectory);
  summary += "== sobolev ==\n";
  summary += sobolev_csv(sob.constants);
  summary += "== bounds ==\n";
  summary += bound_report_csv(ver.report);
  summary += "== digest ==\n";

  out.lines.push_back(std::string("model=") + variant_name(cfg.manifold.variant) +
                      " m0=" + format_double(ver.report.m0) +
                      " positive_case=" + (ver.report.strict_positive ? "1" : "0"));
  out.lines.push_back("samples=" + strprintf("%d", static_cast<int>(ver.report.rows.size())) +
                      " s_floor_worst=" + format_double(ver.report.s_floor_worst) +
                      " all_pass=" + (ver.report.all_pass ? std::string("1") : std::string("0")));
  for (const std::string& l : out.lines) summary += l + "\n";

  out.summary_path = output_path(cfg, "summary.txt");
  write_text_file(out.summary_path, summary);
  out.all_pass = ver.report.all_pass;
  return out;
}

}  // namespace rhflow
