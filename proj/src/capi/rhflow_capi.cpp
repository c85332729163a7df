#include "rhflow/rhflow.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/common.hpp"
#include "core/pipeline.hpp"

using namespace rhflow;

namespace {

thread_local std::string g_error_message;
thread_local std::string g_error_name = "OK";

rhf_status classify(Errc c) {
  switch (c) {
    case Errc::ok:
      return RHF_OK;
    case Errc::bad_config:
    case Errc::bad_dimension:
    case Errc::unsupported_variant:
    case Errc::non_positive_metric:
    case Errc::bad_time_order:
    case Errc::past_degeneracy:
      return RHF_E_CONFIG;
    case Errc::io_failed:
      return RHF_E_IO;
    default:
      return RHF_E_NUMERIC;
  }
}

template <typename Fn>
rhf_status guarded(Fn&& fn) {
  try {
    fn();
    g_error_message.clear();
    g_error_name = "OK";
    return RHF_OK;
  } catch (const Error& e) {
    g_error_message = e.what();
    g_error_name = errc_name(e.code());
    return classify(e.code());
  } catch (const std::exception& e) {
    g_error_message = e.what();
    g_error_name = "INTERNAL";
    return RHF_E_NUMERIC;
  }
}

char* copy_text(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

rhf_status invalid_argument(const char* msg) {
  g_error_message = msg;
  g_error_name = "BAD_CONFIG";
  return RHF_E_CONFIG;
}

}  // namespace

struct rhf_config {
  RunConfig cfg;
};
struct rhf_trajectory {
  std::shared_ptr<const FlowTrajectory> traj;
};
struct rhf_kernel {
  KernelRunResult result;
};
struct rhf_sobolev {
  SobolevConstants constants;
};
struct rhf_report {
  BoundReport report;
};

extern "C" {

const char* rhf_last_error(void) { return g_error_message.c_str(); }
const char* rhf_last_error_name(void) { return g_error_name.c_str(); }

int rhf_exit_code(rhf_status s) {
  switch (s) {
    case RHF_OK: return 0;
    case RHF_E_CONFIG: return 2;
    case RHF_E_IO: return 2;
    case RHF_E_VERIFY: return 3;
    case RHF_E_NUMERIC: return 4;
  }
  return 4;
}

void rhf_set_thread_cap(int threads) { set_thread_cap(threads); }

rhf_status rhf_config_load(const char* path, rhf_config** out) {
  if (!path || !out) return invalid_argument("rhf_config_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new rhf_config{load_run_config(path)}; });
}

rhf_status rhf_config_parse(const char* json_text, rhf_config** out) {
  if (!json_text || !out) return invalid_argument("rhf_config_parse: null argument");
  *out = nullptr;
  return guarded([&] { *out = new rhf_config{parse_run_config(json_text)}; });
}

void rhf_config_free(rhf_config* cfg) { delete cfg; }

rhf_status rhf_flow_run(const rhf_config* cfg, rhf_trajectory** out) {
  if (!cfg || !out) return invalid_argument("rhf_flow_run: null argument");
  *out = nullptr;
  return guarded([&] {
    FlowRunResult r = run_flow_pipeline(cfg->cfg);
    *out = new rhf_trajectory{r.trajectory};
  });
}

void rhf_trajectory_free(rhf_trajectory* traj) { delete traj; }

double rhf_trajectory_t_end(const rhf_trajectory* traj) {
  return traj ? traj->traj->t_end() : 0.0;
}

int rhf_trajectory_checkpoints(const rhf_trajectory* traj) {
  return traj ? static_cast<int>(traj->traj->checkpoints().size()) : 0;
}

rhf_status rhf_trajectory_checkpoint(const rhf_trajectory* traj, int i, double* time,
                                     double* min_s, double* max_s, double* volume) {
  if (!traj) return invalid_argument("rhf_trajectory_checkpoint: null trajectory");
  const auto& cps = traj->traj->checkpoints();
  if (i < 0 || i >= static_cast<int>(cps.size()))
    return invalid_argument("rhf_trajectory_checkpoint: index out of range");
  if (time) *time = cps[static_cast<size_t>(i)].t;
  if (min_s) *min_s = cps[static_cast<size_t>(i)].min_s;
  if (max_s) *max_s = cps[static_cast<size_t>(i)].max_s;
  if (volume) *volume = cps[static_cast<size_t>(i)].volume;
  return RHF_OK;
}

rhf_status rhf_kernel_query(const rhf_config* cfg, const rhf_trajectory* traj,
                            const int source[3], double s, double t, rhf_kernel** out) {
  if (!cfg || !traj || !source || !out)
    return invalid_argument("rhf_kernel_query: null argument");
  *out = nullptr;
  return guarded([&] {
    std::array<int, 3> src{source[0], source[1], source[2]};
    *out = new rhf_kernel{run_kernel_pipeline(cfg->cfg, *traj->traj, src, s, t)};
  });
}

void rhf_kernel_free(rhf_kernel* k) { delete k; }

rhf_status rhf_kernel_diagnostics(const rhf_kernel* k, double* g_value, double* j_t,
                                  double* jtilde_s, double* p_mid, double* q_mid,
                                  double* semigroup_residual) {
  if (!k) return invalid_argument("rhf_kernel_diagnostics: null handle");
  if (g_value) *g_value = k->result.diag.G_fwd;
  if (j_t) *j_t = k->result.diag.J_t;
  if (jtilde_s) *jtilde_s = k->result.diag.Jtilde_s;
  if (p_mid) *p_mid = k->result.diag.P_mid;
  if (q_mid) *q_mid = k->result.diag.Q_mid;
  if (semigroup_residual) *semigroup_residual = k->result.diag.semigroup_residual;
  return RHF_OK;
}

int rhf_kernel_oracle_checked(const rhf_kernel* k) {
  return (k && k->result.oracle_checked) ? 1 : 0;
}

double rhf_kernel_oracle_linf_rel(const rhf_kernel* k) {
  return k ? k->result.oracle_linf_rel : 0.0;
}

rhf_status rhf_sobolev_estimate(const rhf_config* cfg, const rhf_trajectory* traj,
                                const double* times, int n_times, rhf_sobolev** out) {
  if (!cfg || !traj || !out) return invalid_argument("rhf_sobolev_estimate: null argument");
  if (n_times > 0 && !times) return invalid_argument("rhf_sobolev_estimate: null times");
  *out = nullptr;
  return guarded([&] {
    std::vector<double> ts(times, times + std::max(0, n_times));
    SobolevRunResult r = run_sobolev_pipeline(cfg->cfg, *traj->traj, ts);
    *out = new rhf_sobolev{std::move(r.constants)};
  });
}

void rhf_sobolev_free(rhf_sobolev* s) { delete s; }

int rhf_sobolev_size(const rhf_sobolev* s) {
  return s ? static_cast<int>(s->constants.times.size()) : 0;
}

rhf_status rhf_sobolev_row(const rhf_sobolev* s, int i, double* t, double* a, double* b,
                           double* lambda0) {
  if (!s) return invalid_argument("rhf_sobolev_row: null handle");
  if (i < 0 || i >= static_cast<int>(s->constants.times.size()))
    return invalid_argument("rhf_sobolev_row: index out of range");
  size_t j = static_cast<size_t>(i);
  if (t) *t = s->constants.times[j];
  if (a) *a = s->constants.A_curve[j];
  if (b) *b = s->constants.B_curve[j];
  if (lambda0) *lambda0 = j < s->constants.lambda0.size() ? s->constants.lambda0[j] : 0.0;
  return RHF_OK;
}

int rhf_sobolev_positive_case(const rhf_sobolev* s) {
  return (s && s->constants.positive_case) ? 1 : 0;
}

double rhf_sobolev_talenti(const rhf_sobolev* s) { return s ? s->constants.K : 0.0; }

rhf_status rhf_verify_run(const rhf_config* cfg, const rhf_trajectory* traj, rhf_report** out) {
  if (!cfg || !traj || !out) return invalid_argument("rhf_verify_run: null argument");
  *out = nullptr;
  return guarded([&] {
    VerifyRunResult r = run_verify_pipeline(cfg->cfg, *traj->traj);
    *out = new rhf_report{std::move(r.report)};
  });
}

void rhf_report_free(rhf_report* r) { delete r; }

int rhf_report_all_pass(const rhf_report* r) { return (r && r->report.all_pass) ? 1 : 0; }

int rhf_report_rows(const rhf_report* r) {
  return r ? static_cast<int>(r->report.rows.size()) : 0;
}

rhf_status rhf_report_row(const rhf_report* r, int i, double* s, double* t, double* g_actual,
                          double* bound_theorem, double* ratio_theorem, int* pass) {
  if (!r) return invalid_argument("rhf_report_row: null handle");
  if (i < 0 || i >= static_cast<int>(r->report.rows.size()))
    return invalid_argument("rhf_report_row: index out of range");
  const BoundRow& row = r->report.rows[static_cast<size_t>(i)];
  if (s) *s = row.s;
  if (t) *t = row.t;
  if (g_actual) *g_actual = row.g_actual;
  if (bound_theorem) *bound_theorem = row.bound_theorem;
  if (ratio_theorem) *ratio_theorem = row.ratio_theorem;
  if (pass) *pass = row.pass ? 1 : 0;
  return RHF_OK;
}

rhf_status rhf_cmd_run_flow(const char* config_path, char** out_text) {
  if (!config_path || !out_text) return invalid_argument("rhf_cmd_run_flow: null argument");
  *out_text = nullptr;
  return guarded([&] {
    RunConfig cfg = load_run_config(config_path);
    FlowRunResult r = run_flow_pipeline(cfg);
    std::vector<std::string> lines = r.lines;
    lines.push_back("wrote " + r.csv_path);
    *out_text = copy_text(join_lines(lines));
  });
}

rhf_status rhf_cmd_kernel(const char* config_path, const int source[3], double s, double t,
                          char** out_text) {
  if (!config_path || !source || !out_text)
    return invalid_argument("rhf_cmd_kernel: null argument");
  *out_text = nullptr;
  return guarded([&] {
    RunConfig cfg = load_run_config(config_path);
    FlowRunResult flow = run_flow_pipeline(cfg);
    std::array<int, 3> src{source[0], source[1], source[2]};
    KernelRunResult r = run_kernel_pipeline(cfg, *flow.trajectory, src, s, t);
    std::vector<std::string> lines = r.lines;
    lines.push_back("wrote " + r.csv_path);
    *out_text = copy_text(join_lines(lines));
  });
}

rhf_status rhf_cmd_estimate_sobolev(const char* config_path, const double* times, int n_times,
                                    char** out_text) {
  if (!config_path || !out_text)
    return invalid_argument("rhf_cmd_estimate_sobolev: null argument");
  if (n_times > 0 && !times) return invalid_argument("rhf_cmd_estimate_sobolev: null times");
  *out_text = nullptr;
  return guarded([&] {
    RunConfig cfg = load_run_config(config_path);
    FlowRunResult flow = run_flow_pipeline(cfg);
    std::vector<double> ts(times, times + std::max(0, n_times));
    SobolevRunResult r = run_sobolev_pipeline(cfg, *flow.trajectory, ts);
    std::vector<std::string> lines = r.lines;
    lines.push_back("wrote " + r.csv_path);
    *out_text = copy_text(join_lines(lines));
  });
}

rhf_status rhf_cmd_verify(const char* config_path, char** out_text) {
  if (!config_path || !out_text) return invalid_argument("rhf_cmd_verify: null argument");
  *out_text = nullptr;
  bool all_pass = false;
  rhf_status st = guarded([&] {
    RunConfig cfg = load_run_config(config_path);
    FlowRunResult flow = run_flow_pipeline(cfg);
    VerifyRunResult r = run_verify_pipeline(cfg, *flow.trajectory);
    std::vector<std::string> lines = r.lines;
    if (!r.fail_lines.empty()) {
      lines.push_back("failed samples:");
      for (const std::string& l : r.fail_lines) lines.push_back("  " + l);
    }
    lines.push_back(std::string("all_pass=") + (r.report.all_pass ? "1" : "0"));
    lines.push_back("wrote " + r.csv_path);
    all_pass = r.report.all_pass;
    *out_text = copy_text(join_lines(lines));
  });
  if (st != RHF_OK) return st;
  if (!all_pass) {
    g_error_message = "bound verification failed";
    g_error_name = "VERIFY_FAILED";
    return RHF_E_VERIFY;
  }
  return RHF_OK;
}

rhf_status rhf_cmd_report(const char* config_path, char** out_text) {
  if (!config_path || !out_text) return invalid_argument("rhf_cmd_report: null argument");
  *out_text = nullptr;
  bool all_pass = false;
  rhf_status st = guarded([&] {
    RunConfig cfg = load_run_config(config_path);
    ReportRunResult r = run_report_pipeline(cfg);
    std::vector<std::string> lines = r.lines;
    lines.push_back("wrote " + r.summary_path);
    all_pass = r.all_pass;
    *out_text = copy_text(join_lines(lines));
  });
  if (st != RHF_OK) return st;
  if (!all_pass) {
    g_error_message = "bound verification failed";
    g_error_name = "VERIFY_FAILED";
    return RHF_E_VERIFY;
  }
  return RHF_OK;
}

void rhf_string_free(char* s) { std::free(s); }

}  // extern "C"
