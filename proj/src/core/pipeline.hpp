#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/bounds.hpp"
#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/flow.hpp"
#include "core/heatkernel.hpp"
#include "core/sobolev.hpp"

namespace rhflow {

// Orchestration used by the C API and the CLI: every command is "run module
// operations, serialize, hand back printable lines". Callers only format.

void set_thread_cap(int threads);

struct FlowRunResult {
  std::shared_ptr<const FlowTrajectory> trajectory;
  std::string csv_path;
  std::vector<std::string> lines;  // one min/max S line per checkpoint
};
FlowRunResult run_flow_pipeline(const RunConfig& cfg);

struct KernelRunResult {
  KernelDiagnostics diag;
  std::string csv_path;
  bool oracle_checked = false;
  double oracle_linf_rel = 0.0;
  std::vector<std::string> lines;
};
KernelRunResult run_kernel_pipeline(const RunConfig& cfg, const FlowTrajectory& traj,
                                    const std::array<int, 3>& source, double s, double t);

struct SobolevRunResult {
  SobolevConstants constants;
  std::string csv_path;
  std::vector<std::string> lines;
};
SobolevRunResult run_sobolev_pipeline(const RunConfig& cfg, const FlowTrajectory& traj,
                                      const std::vector<double>& times_override);

struct VerifyRunResult {
  SobolevConstants constants;
  BoundReport report;
  std::string csv_path;
  std::vector<std::string> lines;       // per-sample one-liners
  std::vector<std::string> fail_lines;  // subset that failed
};
VerifyRunResult run_verify_pipeline(const RunConfig& cfg, const FlowTrajectory& traj);

struct ReportRunResult {
  bool all_pass = false;
  std::string summary_path;
  std::vector<std::string> lines;
};
ReportRunResult run_report_pipeline(const RunConfig& cfg);

}  // namespace rhflow
