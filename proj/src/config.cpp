#include <cmath>
#include <cstdlib>
#include <set>

#include "bosenet/experiment.hpp"

namespace bosenet {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

template <class T>
T get_or(const json& j, const char* key, const T& fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + "/" + key, e.what());
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path, std::string("missing '") + key + "'");
  return get_or<T>(j, key, T{}, path);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(path, "unknown key '" + k + "'");
}

cd parse_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(path, "expected a number or [re, im]");
}

json complex_json(cd z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

SegmentSpec parse_segment(const json& j, const std::string& path) {
  check_keys(j, {"start", "end", "form", "c", "shift"}, path);
  SegmentSpec s;
  s.start = require<double>(j, "start", path);
  s.end = require<double>(j, "end", path);
  s.form = require<std::string>(j, "form", path);
  s.c = get_or<std::vector<double>>(j, "c", {}, path);
  s.shift = get_or<double>(j, "shift", 0.0, path);
  static const std::set<std::string> forms{"constant", "linear", "sinusoidal"};
  if (!forms.count(s.form)) fail(path + "/form", "unknown form '" + s.form + "'");
  return s;
}

CurveSpec parse_curve(const json& j, const std::string& path) {
  check_keys(j, {"segments", "ref", "scale", "offset"}, path);
  CurveSpec c;
  c.ref = get_or<std::string>(j, "ref", "", path);
  c.scale = get_or<double>(j, "scale", 1.0, path);
  c.offset = get_or<double>(j, "offset", 0.0, path);
  if (j.contains("segments")) {
    const json& segs = j.at("segments");
    if (!segs.is_array()) fail(path + "/segments", "expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i)
      c.segments.push_back(parse_segment(segs[i], path + "/segments/" + std::to_string(i)));
  }
  if (c.ref.empty() && c.segments.empty()) fail(path, "curve needs segments or ref");
  return c;
}

std::vector<CurveSpec> parse_curves(const json& j, const char* key, const std::string& path) {
  std::vector<CurveSpec> out;
  if (!j.contains(key)) return out;
  const json& a = j.at(key);
  if (!a.is_array()) fail(path + "/" + key, "expected an array");
  for (std::size_t i = 0; i < a.size(); ++i)
    out.push_back(parse_curve(a[i], path + "/" + key + "/" + std::to_string(i)));
  return out;
}

json curve_json(const CurveSpec& c) {
  json j;
  if (!c.ref.empty()) {
    j["ref"] = c.ref;
  } else {
    j["segments"] = json::array();
    for (const auto& s : c.segments) {
      json sj{{"start", s.start}, {"end", s.end}, {"form", s.form}, {"c", s.c}};
      if (s.shift != 0.0) sj["shift"] = s.shift;
      j["segments"].push_back(sj);
    }
  }
  if (c.scale != 1.0) j["scale"] = c.scale;
  if (c.offset != 0.0) j["offset"] = c.offset;
  return j;
}

ScheduleConfig parse_schedule(const json& j, const std::string& path) {
  check_keys(j, {"builder", "N", "loops", "tau", "direction", "variant", "f_multiplier", "theta",
                 "alpha", "phase_f", "boundaries", "t_end"},
             path);
  ScheduleConfig s;
  s.builder = require<std::string>(j, "builder", path);
  s.tau = get_or<double>(j, "tau", 1.0, path);
  if (!(s.tau > 0.0)) fail(path + "/tau", "must be positive");
  if (s.builder == "explicit") {
    s.N = require<int>(j, "N", path);
    if (s.N < 2) fail(path + "/N", "at least two modes");
    s.spec.theta = parse_curves(j, "theta", path);
    s.spec.alpha = parse_curves(j, "alpha", path);
    s.spec.phase_f = parse_curves(j, "phase_f", path);
    s.boundaries = get_or<std::vector<double>>(j, "boundaries", {}, path);
    s.t_end = require<double>(j, "t_end", path);
    if (static_cast<int>(s.spec.theta.size()) != s.N - 1)
      fail(path + "/theta", "expected N-1 curves");
  } else if (s.builder == "noon_chiral") {
    s.N = 3;
    s.loops = get_or<int>(j, "loops", 1, path);
    s.direction = get_or<std::string>(j, "direction", "ccw", path);
    s.f_multiplier = get_or<double>(j, "f_multiplier", 3.0, path);
    if (s.direction != "ccw" && s.direction != "cw") fail(path + "/direction", "ccw or cw");
  } else if (s.builder == "fock_chiral") {
    s.N = 4;
    s.loops = get_or<int>(j, "loops", 1, path);
    s.variant = get_or<std::string>(j, "variant", "three_node", path);
    if (s.variant != "three_node" && s.variant != "four_node")
      fail(path + "/variant", "three_node or four_node");
  } else {
    fail(path + "/builder", "unknown builder '" + s.builder + "'");
  }
  if (s.loops < 1) fail(path + "/loops", "at least one loop");
  return s;
}

json schedule_json(const ScheduleConfig& s) {
  json j{{"builder", s.builder}};
  if (s.tau != 1.0) j["tau"] = s.tau;
  if (s.builder == "explicit") {
    j["N"] = s.N;
    auto arr = [](const std::vector<CurveSpec>& v) {
      json a = json::array();
      for (const auto& c : v) a.push_back(curve_json(c));
      return a;
    };
    j["theta"] = arr(s.spec.theta);
    if (!s.spec.alpha.empty()) j["alpha"] = arr(s.spec.alpha);
    if (!s.spec.phase_f.empty()) j["phase_f"] = arr(s.spec.phase_f);
    j["boundaries"] = s.boundaries;
    j["t_end"] = s.t_end;
  } else if (s.builder == "noon_chiral") {
    j["loops"] = s.loops;
    j["direction"] = s.direction;
    j["f_multiplier"] = s.f_multiplier;
  } else {
    j["loops"] = s.loops;
    j["variant"] = s.variant;
  }
  return j;
}

SynthesisConfig parse_synthesis(const json& j, const std::string& path) {
  check_keys(j, {"method", "alpha0", "rate_form", "omega1", "omega2", "omega0", "phase_convention",
                 "phase_value", "phase_constants"},
             path);
  SynthesisConfig s;
  s.method = require<std::string>(j, "method", path);
  s.alpha0 = get_or<double>(j, "alpha0", 0.0, path);
  s.rate_form = get_or<std::string>(j, "rate_form", "first_derivative", path);
  s.omega1 = get_or<double>(j, "omega1", 0.0, path);
  s.omega2 = get_or<double>(j, "omega2", 0.0, path);
  s.omega0 = get_or<double>(j, "omega0", 0.0, path);
  s.phase_convention = get_or<bool>(j, "phase_convention", true, path);
  s.phase_value = get_or<double>(j, "phase_value", 1.5707963267948966, path);
  s.phase_constants = get_or<std::vector<double>>(j, "phase_constants", {}, path);
  static const std::set<std::string> methods{"two_mode", "two_mode_phase", "three_mode",
                                             "four_mode"};
  if (!methods.count(s.method)) fail(path + "/method", "unknown method '" + s.method + "'");
  if (s.rate_form != "first_derivative" && s.rate_form != "second_derivative")
    fail(path + "/rate_form", "first_derivative or second_derivative");
  return s;
}

json synthesis_json(const SynthesisConfig& s) {
  json j{{"method", s.method}};
  if (s.method == "two_mode") {
    j["alpha0"] = s.alpha0;
    j["rate_form"] = s.rate_form;
  } else if (s.method == "two_mode_phase") {
    j["omega1"] = s.omega1;
    j["omega2"] = s.omega2;
    j["omega0"] = s.omega0;
  } else if (s.method == "three_mode") {
    j["rate_form"] = s.rate_form;
  } else {
    j["phase_convention"] = s.phase_convention;
    if (s.phase_convention)
      j["phase_value"] = s.phase_value;
    else
      j["phase_constants"] = s.phase_constants;
  }
  return j;
}

FactorConfig parse_factor(const json& j, const std::string& path) {
  check_keys(j, {"kind", "n", "alpha", "nbar"}, path);
  FactorConfig f;
  f.kind = require<std::string>(j, "kind", path);
  if (f.kind == "fock") {
    f.n = require<int>(j, "n", path);
    if (f.n < 0) fail(path + "/n", "must be non-negative");
  } else if (f.kind == "coherent" || f.kind == "cat") {
    if (!j.contains("alpha")) fail(path, "missing 'alpha'");
    f.alpha = parse_complex(j.at("alpha"), path + "/alpha");
  } else if (f.kind == "thermal") {
    f.nbar = require<double>(j, "nbar", path);
    if (f.nbar < 0) fail(path + "/nbar", "must be non-negative");
  } else {
    fail(path + "/kind", "unknown factor '" + f.kind + "'");
  }
  return f;
}

json factor_json(const FactorConfig& f) {
  json j{{"kind", f.kind}};
  if (f.kind == "fock") j["n"] = f.n;
  if (f.kind == "coherent" || f.kind == "cat") j["alpha"] = complex_json(f.alpha);
  if (f.kind == "thermal") j["nbar"] = f.nbar;
  return j;
}

StateConfig parse_state(const json& j, const std::string& path) {
  check_keys(j, {"kind", "occupation", "modes", "n", "factors"}, path);
  StateConfig s;
  s.kind = require<std::string>(j, "kind", path);
  if (s.kind == "fock") {
    s.occupation = require<Occupation>(j, "occupation", path);
  } else if (s.kind == "noon") {
    s.modes = require<std::vector<int>>(j, "modes", path);
    s.n = require<int>(j, "n", path);
    if (s.modes.size() != 2 || s.modes[0] == s.modes[1]) fail(path + "/modes", "two distinct modes");
  } else if (s.kind == "product") {
    const json& fs = j.contains("factors") ? j.at("factors") : json();
    if (!fs.is_array() || fs.empty()) fail(path + "/factors", "expected a non-empty array");
    for (std::size_t i = 0; i < fs.size(); ++i)
      s.factors.push_back(parse_factor(fs[i], path + "/factors/" + std::to_string(i)));
  } else {
    fail(path + "/kind", "unknown state kind '" + s.kind + "'");
  }
  return s;
}

json state_json(const StateConfig& s) {
  json j{{"kind", s.kind}};
  if (s.kind == "fock") j["occupation"] = s.occupation;
  if (s.kind == "noon") {
    j["modes"] = s.modes;
    j["n"] = s.n;
  }
  if (s.kind == "product") {
    j["factors"] = json::array();
    for (const auto& f : s.factors) j["factors"].push_back(factor_json(f));
  }
  return j;
}

std::optional<double> opt_double(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) return std::nullopt;
  return get_or<double>(j, key, 0.0, path);
}

void validate_state(const StateConfig& s, const ExperimentConfig& c, const std::string& path) {
  const int N = c.schedule.N;
  if (s.kind == "fock") {
    if (static_cast<int>(s.occupation.size()) != N) fail(path + "/occupation", "length must be N");
    int total = 0;
    for (std::size_t i = 0; i < s.occupation.size(); ++i) {
      const int m = s.occupation[i];
      if (m < 0) fail(path + "/occupation", "negative occupation");
      if (c.basis.kind == "cutoff" && m > c.basis.cutoffs[i])
        fail(path + "/occupation", "occupation exceeds cutoff");
      total += m;
    }
    if (c.basis.kind == "sector" && total != c.basis.n)
      fail(path + "/occupation", "total excitation differs from the sector");
  } else if (s.kind == "noon") {
    for (int m : s.modes)
      if (m < 1 || m > N) fail(path + "/modes", "mode index out of range");
    if (c.basis.kind == "sector" && s.n != c.basis.n) fail(path + "/n", "differs from the sector");
  } else {
    if (c.basis.kind != "cutoff") fail(path, "product states need a cutoff basis");
    if (static_cast<int>(s.factors.size()) != N) fail(path + "/factors", "one factor per mode");
    for (std::size_t i = 0; i < s.factors.size(); ++i)
      if (s.factors[i].kind == "fock" && s.factors[i].n > c.basis.cutoffs[i])
        fail(path + "/factors/" + std::to_string(i), "occupation exceeds cutoff");
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"name", "description", "schedule", "synthesis", "basis", "initial", "observables",
                 "checks", "grid", "verify", "threads", "$schema"},
             "");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", "custom", "");
  c.description = get_or<std::string>(j, "description", "", "");
  c.schedule = parse_schedule(j.contains("schedule") ? j.at("schedule") : json::object(), "/schedule");
  c.synthesis =
      parse_synthesis(j.contains("synthesis") ? j.at("synthesis") : json::object(), "/synthesis");

  const int N = c.schedule.N;
  const std::string& m = c.synthesis.method;
  if (((m == "two_mode" || m == "two_mode_phase") && N != 2) || (m == "three_mode" && N != 3) ||
      (m == "four_mode" && N < 3))
    fail("/synthesis/method", "method does not match the schedule mode count");
  if (m == "two_mode_phase" && c.schedule.spec.alpha.size() != 1)
    fail("/schedule/alpha", "phase-modulated synthesis needs one alpha curve");
  if (m != "two_mode_phase" && m != "four_mode" && !c.schedule.spec.alpha.empty())
    fail("/schedule/alpha", "alpha is derived by this synthesis method");
  if (m == "four_mode" && !c.synthesis.phase_convention &&
      static_cast<int>(c.synthesis.phase_constants.size()) != N - 1)
    fail("/synthesis/phase_constants", "expected N-1 constants");

  const json& b = j.contains("basis") ? j.at("basis") : json::object();
  check_keys(b, {"kind", "n", "cutoffs"}, "/basis");
  c.basis.kind = require<std::string>(b, "kind", "/basis");
  if (c.basis.kind == "sector") {
    c.basis.n = require<int>(b, "n", "/basis");
    if (c.basis.n < 0) fail("/basis/n", "must be non-negative");
  } else if (c.basis.kind == "cutoff") {
    c.basis.cutoffs = require<std::vector<int>>(b, "cutoffs", "/basis");
    if (static_cast<int>(c.basis.cutoffs.size()) != N) fail("/basis/cutoffs", "length must be N");
    for (int x : c.basis.cutoffs)
      if (x < 0) fail("/basis/cutoffs", "must be non-negative");
  } else {
    fail("/basis/kind", "sector or cutoff");
  }

  c.initial = parse_state(j.contains("initial") ? j.at("initial") : json::object(), "/initial");
  validate_state(c.initial, c, "/initial");

  std::set<std::string> labels;
  if (j.contains("observables")) {
    const json& obs = j.at("observables");
    if (!obs.is_array()) fail("/observables", "expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string path = "/observables/" + std::to_string(i);
      const json& o = obs[i];
      check_keys(o, {"label", "kind", "target", "occupation", "modes", "n"}, path);
      ObservableConfig oc;
      oc.label = require<std::string>(o, "label", path);
      oc.kind = require<std::string>(o, "kind", path);
      if (!labels.insert(oc.label).second) fail(path + "/label", "duplicate label");
      if (oc.kind == "fidelity" || oc.kind == "overlap") {
        if (!o.contains("target")) fail(path, "missing 'target'");
        oc.target = parse_state(o.at("target"), path + "/target");
        validate_state(oc.target, c, path + "/target");
      } else if (oc.kind == "population") {
        StateConfig tmp;
        tmp.kind = "fock";
        tmp.occupation = oc.occupation = require<Occupation>(o, "occupation", path);
        validate_state(tmp, c, path);
      } else if (oc.kind == "noon_fidelity") {
        StateConfig tmp;
        tmp.kind = "noon";
        tmp.modes = oc.modes = require<std::vector<int>>(o, "modes", path);
        tmp.n = oc.n = require<int>(o, "n", path);
        if (oc.modes.size() != 2 || oc.modes[0] == oc.modes[1])
          fail(path + "/modes", "two distinct modes");
        validate_state(tmp, c, path);
      } else {
        fail(path + "/kind", "unknown observable '" + oc.kind + "'");
      }
      c.observables.push_back(oc);
    }
  }

  if (j.contains("checks")) {
    const json& cs = j.at("checks");
    if (!cs.is_array()) fail("/checks", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string path = "/checks/" + std::to_string(i);
      const json& x = cs[i];
      check_keys(x, {"label", "kind", "observable", "t", "min", "max", "target", "tol", "t0", "t1",
                     "count", "period"},
                 path);
      CheckConfig k;
      k.kind = require<std::string>(x, "kind", path);
      k.label = get_or<std::string>(x, "label", k.kind, path);
      k.observable = get_or<std::string>(x, "observable", "", path);
      k.t = get_or<double>(x, "t", 0.0, path);
      k.min = opt_double(x, "min", path);
      k.max = opt_double(x, "max", path);
      k.target = opt_double(x, "target", path);
      k.tol = get_or<double>(x, "tol", 0.0, path);
      k.t0 = get_or<double>(x, "t0", 0.0, path);
      k.t1 = get_or<double>(x, "t1", 0.0, path);
      k.count = get_or<int>(x, "count", 0, path);
      k.period = get_or<double>(x, "period", 0.0, path);
      static const std::set<std::string> kinds{"value", "peaks", "repeat"};
      if (!kinds.count(k.kind)) fail(path + "/kind", "unknown check '" + k.kind + "'");
      if (!labels.count(k.observable)) fail(path + "/observable", "unknown observable");
      if (k.kind == "value" && !k.min && !k.max && !k.target)
        fail(path, "value check needs min, max or target");
      c.checks.push_back(k);
    }
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"points_per_stage", "steps_per_stage", "tolerance", "max_refinements",
                   "extra_times", "t_stop"},
               "/grid");
    c.grid.points_per_stage = get_or<int>(g, "points_per_stage", 100, "/grid");
    c.grid.steps_per_stage = get_or<int>(g, "steps_per_stage", 2000, "/grid");
    c.grid.tolerance = get_or<double>(g, "tolerance", 1e-9, "/grid");
    c.grid.max_refinements = get_or<int>(g, "max_refinements", 4, "/grid");
    c.grid.extra_times = get_or<std::vector<double>>(g, "extra_times", {}, "/grid");
    c.grid.t_stop = opt_double(g, "t_stop", "/grid");
    if (c.grid.points_per_stage < 1) fail("/grid/points_per_stage", "at least 1");
    if (c.grid.steps_per_stage < 2) fail("/grid/steps_per_stage", "at least 2");
    if (!(c.grid.tolerance > 0)) fail("/grid/tolerance", "must be positive");
    if (c.grid.max_refinements < 0) fail("/grid/max_refinements", "must be non-negative");
  }
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    check_keys(v, {"points_per_stage", "residual_tol", "pulse_samples_per_stage"}, "/verify");
    c.verify.points_per_stage = get_or<int>(v, "points_per_stage", 200, "/verify");
    c.verify.residual_tol = get_or<double>(v, "residual_tol", 1e-10, "/verify");
    c.verify.pulse_samples_per_stage = get_or<int>(v, "pulse_samples_per_stage", 1000, "/verify");
    if (c.verify.points_per_stage < 1 || c.verify.pulse_samples_per_stage < 1)
      fail("/verify", "sample counts must be positive");
  }
  c.threads = get_or<int>(j, "threads", 1, "");
  if (c.threads < 1) fail("/threads", "at least 1");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  j["schedule"] = schedule_json(c.schedule);
  j["synthesis"] = synthesis_json(c.synthesis);
  j["basis"] = c.basis.kind == "sector" ? json{{"kind", "sector"}, {"n", c.basis.n}}
                                        : json{{"kind", "cutoff"}, {"cutoffs", c.basis.cutoffs}};
  j["initial"] = state_json(c.initial);
  j["observables"] = json::array();
  for (const auto& o : c.observables) {
    json oj{{"label", o.label}, {"kind", o.kind}};
    if (o.kind == "fidelity" || o.kind == "overlap") oj["target"] = state_json(o.target);
    if (o.kind == "population") oj["occupation"] = o.occupation;
    if (o.kind == "noon_fidelity") {
      oj["modes"] = o.modes;
      oj["n"] = o.n;
    }
    j["observables"].push_back(oj);
  }
  j["checks"] = json::array();
  for (const auto& k : c.checks) {
    json kj{{"label", k.label}, {"kind", k.kind}, {"observable", k.observable}};
    if (k.kind == "value") {
      kj["t"] = k.t;
      if (k.min) kj["min"] = *k.min;
      if (k.max) kj["max"] = *k.max;
      if (k.target) {
        kj["target"] = *k.target;
        kj["tol"] = k.tol;
      }
    } else if (k.kind == "peaks") {
      kj["t0"] = k.t0;
      kj["t1"] = k.t1;
      kj["count"] = k.count;
    } else {
      kj["t"] = k.t;
      kj["period"] = k.period;
      kj["tol"] = k.tol;
    }
    j["checks"].push_back(kj);
  }
  j["grid"] = {{"points_per_stage", c.grid.points_per_stage},
               {"steps_per_stage", c.grid.steps_per_stage},
               {"tolerance", c.grid.tolerance},
               {"max_refinements", c.grid.max_refinements},
               {"extra_times", c.grid.extra_times}};
  if (c.grid.t_stop) j["grid"]["t_stop"] = *c.grid.t_stop;
  j["verify"] = {{"points_per_stage", c.verify.points_per_stage},
                 {"residual_tol", c.verify.residual_tol},
                 {"pulse_samples_per_stage", c.verify.pulse_samples_per_stage}};
  j["threads"] = c.threads;
  return j;
}

json apply_overrides(json j, const Overrides& o) {
  if (o.loops) {
    if (!j.contains("schedule") || j["schedule"].value("builder", "") == "explicit")
      throw ConfigError("--loops applies only to chiral presets");
    j["schedule"]["loops"] = *o.loops;
  }
  if (o.steps_per_stage) j["grid"]["steps_per_stage"] = *o.steps_per_stage;
  if (o.tolerance) j["grid"]["tolerance"] = *o.tolerance;
  if (o.threads) j["threads"] = *o.threads;
  return j;
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag,
                                      const std::string& fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BOSENET_OUT"); env && *env) return env;
  return fallback;
}

int resolve_threads(const std::optional<int>& flag, int fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BOSENET_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ConfigError("BOSENET_THREADS must be a positive integer");
  }
  return fallback;
}

}  // namespace bosenet
