// Coupling strength alpha(t): positive, non-increasing, with closed-form
// antiderivative per schedule form so flow closed forms stay exact.
#pragma once

#include <vector>

namespace rhflow {

enum class ScheduleForm { constant, linear_floor, exponential };

struct CouplingSchedule {
  ScheduleForm form = ScheduleForm::constant;
  double alpha0 = 1.0;
  double rate = 0.0;   // decay slope (linear_floor) or exponent (exponential)
  double floor = 1.0;  // lower clamp; must satisfy 0 < floor <= alpha0

  void validate() const;

  double value(double t) const;
  // d(alpha)/dt from the right, used by the evolution of S
  double derivative(double t) const;
  // integral of alpha over [0,t], closed form
  double integral(double t) const;
  // times in (0, t_end) where alpha is not smooth; integrators align steps here
  std::vector<double> kink_times(double t_end) const;
};

}  // namespace rhflow
