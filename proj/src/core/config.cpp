#include "core/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "core/common.hpp"

namespace rhflow {

using nlohmann::json;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::round_sphere: return "round_sphere";
    case Variant::torus_linear: return "torus_linear";
    case Variant::coupled_circle: return "coupled_circle";
  }
  return "?";
}

void ManifoldConfig::validate() const {
  if (dimension < 3) fail(Errc::bad_dimension, "dimension must be >= 3");
  if (grid < 8) fail(Errc::bad_config, "grid must be >= 8");
  coupling.validate();
  switch (variant) {
    case Variant::round_sphere:
      if (!(r2_0 > 0.0)) fail(Errc::non_positive_metric, "sphere: r0^2 must be > 0");
      break;
    case Variant::torus_linear:
      if (dimension != 3) fail(Errc::bad_dimension, "torus_linear requires dimension 3");
      for (double l : torus_lengths)
        if (!(l > 0.0)) fail(Errc::bad_config, "torus side lengths must be > 0");
      for (double m : torus_metric0)
        if (!(m > 0.0)) fail(Errc::non_positive_metric, "torus metric entries must be > 0");
      break;
    case Variant::coupled_circle: {
      if (dimension != 3) fail(Errc::bad_dimension, "coupled_circle requires dimension 3");
      for (double l : torus_lengths)
        if (!(l > 0.0)) fail(Errc::bad_config, "torus side lengths must be > 0");
      if (a_samples0.size() != grid)
        fail(Errc::bad_config, "coupled_circle: A0 sample count must equal grid");
      if (a_samples0.size() > 0 && a_samples0.minCoeff() <= 0.0)
        fail(Errc::non_positive_metric, "coupled_circle: A0 samples must be > 0");
      if (psi_samples0.size() != 0 && psi_samples0.size() != grid)
        fail(Errc::bad_config, "coupled_circle: psi0 sample count must equal grid");
      break;
    }
  }
}

void FlowParams::validate() const {
  if (!(t_end > 0.0)) fail(Errc::bad_config, "flow: t_end must be > 0");
  if (!(dt > 0.0)) fail(Errc::bad_config, "flow: dt must be > 0");
  if (checkpoint_stride < 1) fail(Errc::bad_config, "flow: checkpoint_stride must be >= 1");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    fail(Errc::bad_config, "flow: cfl_safety must lie in (0,1]");
}

void KernelParams::validate() const {
  if (min_steps < 16) fail(Errc::bad_config, "kernel: min_steps must be >= 16");
  if (!(oracle_tail_tol > 0.0)) fail(Errc::bad_config, "kernel: oracle_tail_tol must be > 0");
  if (!(mollify_eps_factor > 0.0 && mollify_eps_factor < 0.5))
    fail(Errc::bad_config, "kernel: mollify_eps_factor must lie in (0,0.5)");
}

void SobolevParams::validate() const {
  if (!(bisect_rtol > 0.0)) fail(Errc::bad_config, "sobolev: bisect_rtol must be > 0");
  for (const auto& row : override_curve)
    if (!(row[1] > 0.0) || row[2] < 0.0)
      fail(Errc::bad_config, "sobolev: override rows need A > 0 and B >= 0");
  for (size_t i = 1; i < override_curve.size(); ++i)
    if (!(override_curve[i][0] > override_curve[i - 1][0]))
      fail(Errc::bad_config, "sobolev: override times must be strictly increasing");
}

void RunConfig::validate() const {
  manifold.validate();
  flow.validate();
  kernel.validate();
  sobolev.validate();
  if (manifold.variant == Variant::round_sphere && !flow.freeze) {
    double t_collapse = manifold.r2_0 / (2.0 * (manifold.dimension - 1));
    if (flow.t_end >= t_collapse)
      fail(Errc::past_degeneracy,
           strprintf("sphere collapses at t = %.6g; t_end must be smaller", t_collapse));
  }
  int per_axis = manifold.grid;
  for (const Sample& smp : samples) {
    if (!(smp.s < smp.t))
      fail(Errc::bad_time_order, "sample requires s < t");
    if (smp.s < 0.0 || smp.t > flow.t_end)
      fail(Errc::bad_config, "sample times must lie inside [0, t_end]");
    for (int a = 0; a < 3; ++a) {
      if (smp.x[a] < 0 || smp.x[a] >= per_axis || smp.y[a] < 0 || smp.y[a] >= per_axis)
        fail(Errc::bad_config, "sample node index out of range");
    }
  }
}

namespace {

ScheduleForm parse_form(const std::string& s) {
  if (s == "constant") return ScheduleForm::constant;
  if (s == "linear_floor") return ScheduleForm::linear_floor;
  if (s == "exponential") return ScheduleForm::exponential;
  fail(Errc::bad_config, "coupling.form must be constant|linear_floor|exponential");
}

Variant parse_variant(const std::string& s) {
  if (s == "round_sphere") return Variant::round_sphere;
  if (s == "torus_linear") return Variant::torus_linear;
  if (s == "coupled_circle") return Variant::coupled_circle;
  fail(Errc::unsupported_variant,
       "variant must be round_sphere|torus_linear|coupled_circle");
}

// Periodic sample arrays can be given either literally ("samples": [...]) or as
// a small harmonic recipe that we sample on the grid; the latter keeps shipped
// configs readable and exact.
Vec parse_periodic_samples(const json& j, int n, double length, const char* what) {
  if (j.contains("samples")) {
    const auto& arr = j.at("samples");
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
      fail(Errc::bad_config, strprintf("%s: samples must be an array of length grid", what));
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = arr.at(i).get<double>();
    return v;
  }
  double base = j.value("base", 0.0);
  Vec v = Vec::Constant(n, base);
  if (j.contains("harmonics")) {
    for (const auto& h : j.at("harmonics")) {
      int k = h.at("k").get<int>();
      double c = h.value("cos", 0.0), s = h.value("sin", 0.0);
      for (int i = 0; i < n; ++i) {
        double x = length * i / n;
        double w = 2.0 * M_PI * k * x / length;
        v[i] += c * std::cos(w) + s * std::sin(w);
      }
    }
  }
  return v;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(Errc::bad_config, std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig rc;
  try {
    ManifoldConfig& m = rc.manifold;
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.dimension = j.value("dimension", 3);
    if (j.contains("grid")) m.grid = j.at("grid").get<int>();

    if (j.contains("torus_lengths")) {
      const auto& tl = j.at("torus_lengths");
      for (int a = 0; a < 3; ++a) m.torus_lengths[a] = tl.at(a).get<double>();
    }
    if (j.contains("metric0")) {
      const json& g0 = j.at("metric0");
      if (m.variant == Variant::round_sphere) {
        m.r2_0 = g0.at("r2").get<double>();
      } else if (m.variant == Variant::torus_linear) {
        m.torus_metric0 = {g0.at("A").get<double>(), g0.at("B").get<double>(),
                           g0.at("C").get<double>()};
      } else {
        m.a_samples0 =
            parse_periodic_samples(g0.at("A"), m.grid, m.torus_lengths[0], "metric0.A");
      }
    } else if (m.variant == Variant::coupled_circle) {
      fail(Errc::bad_config, "coupled_circle requires metric0.A");
    }
    if (j.contains("map0")) {
      const json& p0 = j.at("map0");
      m.winding = p0.value("winding", 0);
      if (m.variant == Variant::coupled_circle && p0.contains("psi"))
        m.psi_samples0 =
            parse_periodic_samples(p0.at("psi"), m.grid, m.torus_lengths[0], "map0.psi");
    }
    if (m.variant == Variant::coupled_circle && m.psi_samples0.size() == 0)
      m.psi_samples0 = Vec::Zero(m.grid);

    if (j.contains("coupling")) {
      const json& c = j.at("coupling");
      m.coupling.form = parse_form(c.value("form", std::string("constant")));
      m.coupling.alpha0 = c.value("alpha0", 1.0);
      m.coupling.rate = c.value("rate", 0.0);
      m.coupling.floor = c.value("floor", m.coupling.alpha0);
    }

    if (j.contains("flow")) {
      const json& f = j.at("flow");
      rc.flow.t_end = f.value("t_end", rc.flow.t_end);
      rc.flow.dt = f.value("dt", rc.flow.dt);
      std::string integ = f.value("integrator", std::string("rk4"));
      if (integ == "rk4")
        rc.flow.integrator = Integrator::rk4;
      else if (integ == "rk45")
        rc.flow.integrator = Integrator::rk45_adaptive;
      else
        fail(Errc::bad_config, "flow.integrator must be rk4|rk45");
      rc.flow.rtol = f.value("rtol", rc.flow.rtol);
      rc.flow.atol = f.value("atol", rc.flow.atol);
      rc.flow.checkpoint_stride = f.value("checkpoint_stride", rc.flow.checkpoint_stride);
      rc.flow.freeze = f.value("freeze", false);
      rc.flow.cfl_safety = f.value("cfl_safety", rc.flow.cfl_safety);
    }

    if (j.contains("kernel")) {
      const json& k = j.at("kernel");
      rc.kernel.min_steps = k.value("steps", rc.kernel.min_steps);
      rc.kernel.oracle_tail_tol = k.value("oracle_tail_tol", rc.kernel.oracle_tail_tol);
      rc.kernel.mollify_eps_factor =
          k.value("mollify_eps_factor", rc.kernel.mollify_eps_factor);
    }

    if (j.contains("sobolev")) {
      const json& s = j.at("sobolev");
      std::string conv = s.value("convention", std::string("squared"));
      if (conv == "squared")
        rc.sobolev.convention = AConvention::squared;
      else if (conv == "plain")
        rc.sobolev.convention = AConvention::plain;
      else
        fail(Errc::bad_config, "sobolev.convention must be squared|plain");
      if (s.contains("times"))
        rc.sobolev.times = s.at("times").get<std::vector<double>>();
      if (s.contains("override")) {
        for (const auto& row : s.at("override"))
          rc.sobolev.override_curve.push_back(
              {row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>()});
      }
      rc.sobolev.bisect_rtol = s.value("bisect_rtol", rc.sobolev.bisect_rtol);
    }

    if (j.contains("samples")) {
      for (const auto& sj : j.at("samples")) {
        Sample smp;
        auto read_node = [](const json& nj, std::array<int, 3>& out) {
          if (nj.is_number_integer()) {
            out = {nj.get<int>(), 0, 0};
          } else {
            for (int a = 0; a < 3; ++a) out[a] = nj.at(a).get<int>();
          }
        };
        read_node(sj.at("x"), smp.x);
        read_node(sj.at("y"), smp.y);
        smp.s = sj.at("s").get<double>();
        smp.t = sj.at("t").get<double>();
        rc.samples.push_back(smp);
      }
    }

    rc.output_dir = j.value("output_dir", rc.output_dir);
    rc.seed = j.value("seed", 42ull);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::bad_config, std::string("config error: ") + e.what());
  }

  rc.validate();
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_failed, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace rhflow
