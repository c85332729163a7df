// Shared error taxonomy and small helpers used across the core.
#pragma once

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace rhflow {

enum class Errc {
  ok = 0,
  bad_config,           // malformed / inconsistent run configuration
  bad_dimension,        // n < 3 or a variant that requires n == 3 got something else
  unsupported_variant,  // operation not defined for this manifold variant
  non_positive_metric,  // a metric coefficient <= 0 was supplied
  degenerate_metric,    // metric collapsed below the degeneracy floor during a run
  past_degeneracy,      // requested time at or beyond the collapse time
  bad_time_order,       // required s < t (or a time outside the trajectory span)
  step_rejected_limit,  // adaptive integrator rejected too many consecutive steps
  series_not_converged, // eigen-sum truncation failed to meet its tail tolerance
  quadrature_failed,    // adaptive quadrature hit depth limit before tolerance
  eigensolve_failed,    // dense symmetric eigensolver did not converge
  empty_probe_set,      // probe inequality evaluated with no probes
  bisection_failed,     // bracketing failed while estimating a Sobolev constant
  denominator_zero,     // a comparison-bound denominator vanished (bad m0 regime)
  nonpositive_integral, // a bound integral that must be > 0 came out <= 0
  not_positive_case,    // corollary bound requested without S(.,0) > 0
  io_failed,            // file could not be read or written
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ok: return "OK";
    case Errc::bad_config: return "BAD_CONFIG";
    case Errc::bad_dimension: return "BAD_DIMENSION";
    case Errc::unsupported_variant: return "UNSUPPORTED_VARIANT";
    case Errc::non_positive_metric: return "NON_POSITIVE_METRIC";
    case Errc::degenerate_metric: return "DEGENERATE_METRIC";
    case Errc::past_degeneracy: return "PAST_DEGENERACY";
    case Errc::bad_time_order: return "BAD_TIME_ORDER";
    case Errc::step_rejected_limit: return "STEP_REJECTED_LIMIT";
    case Errc::series_not_converged: return "SERIES_NOT_CONVERGED";
    case Errc::quadrature_failed: return "QUADRATURE_FAILED";
    case Errc::eigensolve_failed: return "EIGENSOLVE_FAILED";
    case Errc::empty_probe_set: return "EMPTY_PROBE_SET";
    case Errc::bisection_failed: return "BISECTION_FAILED";
    case Errc::denominator_zero: return "DENOMINATOR_ZERO";
    case Errc::nonpositive_integral: return "NONPOSITIVE_INTEGRAL";
    case Errc::not_positive_case: return "NOT_POSITIVE_CASE";
    case Errc::io_failed: return "IO_FAILED";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline std::string strprintf(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return std::string(buf);
}

// Deterministic counter-based RNG so probe suites are identical across runs
// and platforms. splitmix64 core, Box-Muller for normals.
class Rng {
 public:
  explicit Rng(unsigned long long seed) : state_(seed) {}

  unsigned long long next_u64() {
    unsigned long long z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in (0,1); never returns 0 so log() below is safe
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  unsigned long long state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rhflow
