// Thin command-line front end over the C API: parses arguments, forwards to
// the library, prints the returned text, maps status to the exit convention
// (0 ok, 2 usage/config, 3 verification failure, 4 numerical failure).
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rhflow/rhflow.h"

namespace {

int finish(rhf_status st, char* text) {
  if (text) {
    std::fputs(text, stdout);
    rhf_string_free(text);
  }
  if (st != RHF_OK)
    std::fprintf(stderr, "error [%s]: %s\n", rhf_last_error_name(), rhf_last_error());
  return rhf_exit_code(st);
}

bool parse_source(const std::string& text, int out[3]) {
  out[0] = out[1] = out[2] = 0;
  int n = std::sscanf(text.c_str(), "%d:%d:%d", &out[0], &out[1], &out[2]);
  return n == 1 || n == 3;
}

bool parse_times(const std::string& text, std::vector<double>& out) {
  const char* p = text.c_str();
  while (*p) {
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) return false;
    out.push_back(v);
    p = (*end == ',') ? end + 1 : end;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* cap = std::getenv("RHFLOW_THREADS")) rhf_set_thread_cap(std::atoi(cap));

  CLI::App app{"coupled geometric flow and heat kernel laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string source_text = "0";
  std::string times_text;
  double s_time = 0.0, t_time = 0.0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")
        ->required();
  };

  CLI::App* cmd_flow =
      app.add_subcommand("run-flow", "integrate the flow and export the trajectory");
  add_config(cmd_flow);

  CLI::App* cmd_kernel = app.add_subcommand("kernel", "solve the kernel about a source node");
  add_config(cmd_kernel);
  cmd_kernel->add_option("--source", source_text, "source node index, i or i:j:k")->required();
  cmd_kernel->add_option("--s", s_time, "source time")->required();
  cmd_kernel->add_option("--t", t_time, "field time")->required();

  CLI::App* cmd_sobolev =
      app.add_subcommand("estimate-sobolev", "estimate the inequality constants A(t), B(t)");
  add_config(cmd_sobolev);
  cmd_sobolev->add_option("--times", times_text, "comma separated estimation times");

  CLI::App* cmd_verify =
      app.add_subcommand("verify", "check the kernel bounds on the configured samples");
  add_config(cmd_verify);

  CLI::App* cmd_report =
      app.add_subcommand("report", "run flow, constants and bounds; write one summary");
  add_config(cmd_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // the command fills `text`, so it must be sequenced before finish() reads it
  char* text = nullptr;
  if (cmd_flow->parsed()) {
    rhf_status st = rhf_cmd_run_flow(config_path.c_str(), &text);
    return finish(st, text);
  }

  if (cmd_kernel->parsed()) {
    int src[3];
    if (!parse_source(source_text, src)) {
      std::fprintf(stderr, "error [BAD_CONFIG]: --source expects i or i:j:k\n");
      return 2;
    }
    rhf_status st = rhf_cmd_kernel(config_path.c_str(), src, s_time, t_time, &text);
    return finish(st, text);
  }

  if (cmd_sobolev->parsed()) {
    std::vector<double> times;
    if (!times_text.empty() && !parse_times(times_text, times)) {
      std::fprintf(stderr, "error [BAD_CONFIG]: --times expects comma separated numbers\n");
      return 2;
    }
    rhf_status st = rhf_cmd_estimate_sobolev(config_path.c_str(),
                                             times.empty() ? nullptr : times.data(),
                                             static_cast<int>(times.size()), &text);
    return finish(st, text);
  }

  if (cmd_verify->parsed()) {
    rhf_status st = rhf_cmd_verify(config_path.c_str(), &text);
    return finish(st, text);
  }
  if (cmd_report->parsed()) {
    rhf_status st = rhf_cmd_report(config_path.c_str(), &text);
    return finish(st, text);
  }
  return 2;
}
