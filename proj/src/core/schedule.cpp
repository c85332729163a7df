#include "core/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "core/common.hpp"

namespace rhflow {

void CouplingSchedule::validate() const {
  if (!(alpha0 > 0.0)) fail(Errc::bad_config, "coupling: alpha0 must be > 0");
  if (form == ScheduleForm::constant) return;
  if (!(rate >= 0.0))
    fail(Errc::bad_config, "coupling: rate must be >= 0; alpha(t) is required to be non-increasing");
  if (!(floor > 0.0) || floor > alpha0)
    fail(Errc::bad_config,
         "coupling: floor must satisfy 0 < floor <= alpha0; alpha(t) is required to be non-increasing");
}

double CouplingSchedule::value(double t) const {
  switch (form) {
    case ScheduleForm::constant:
      return alpha0;
    case ScheduleForm::linear_floor:
      return std::max(alpha0 - rate * t, floor);
    case ScheduleForm::exponential:
      return floor + (alpha0 - floor) * std::exp(-rate * t);
  }
  return alpha0;
}

double CouplingSchedule::derivative(double t) const {
  switch (form) {
    case ScheduleForm::constant:
      return 0.0;
    case ScheduleForm::linear_floor:
      return (alpha0 - rate * t > floor) ? -rate : 0.0;
    case ScheduleForm::exponential:
      return -rate * (alpha0 - floor) * std::exp(-rate * t);
  }
  return 0.0;
}

double CouplingSchedule::integral(double t) const {
  switch (form) {
    case ScheduleForm::constant:
      return alpha0 * t;
    case ScheduleForm::linear_floor: {
      if (rate == 0.0) return alpha0 * t;
      double t_kink = (alpha0 - floor) / rate;
      if (t <= t_kink) return alpha0 * t - 0.5 * rate * t * t;
      double at_kink = alpha0 * t_kink - 0.5 * rate * t_kink * t_kink;
      return at_kink + floor * (t - t_kink);
    }
    case ScheduleForm::exponential: {
      if (rate == 0.0) return alpha0 * t;
      return floor * t + (alpha0 - floor) / rate * (1.0 - std::exp(-rate * t));
    }
  }
  return alpha0 * t;
}

std::vector<double> CouplingSchedule::kink_times(double t_end) const {
  std::vector<double> out;
  if (form == ScheduleForm::linear_floor && rate > 0.0) {
    double t_kink = (alpha0 - floor) / rate;
    if (t_kink > 0.0 && t_kink < t_end) out.push_back(t_kink);
  }
  return out;
}

}  // namespace rhflow
