#pragma once

#include <string>

#include "core/bounds.hpp"
#include "core/config.hpp"
#include "core/flow.hpp"
#include "core/heatkernel.hpp"
#include "core/sobolev.hpp"

namespace rhflow {

// %.17g, round-trip exact; the single formatting path for every emitted number
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

std::string trajectory_csv(const FlowTrajectory& traj);

// field export along the reduced coordinate; tori fix the transverse
// coordinates at the source node (the exported section passes through it)
std::string kernel_field_csv(const FlowTrajectory& traj, const KernelField& field,
                             const KernelDiagnostics& diag, const KernelParams& kp);

std::string sobolev_csv(const SobolevConstants& sob);

std::string bound_report_csv(const BoundReport& rep);

}  // namespace rhflow
