#include "bosenet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>

namespace bosenet {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- building

BasisPtr make_basis(const ExperimentConfig& c) {
  const ModeKind kind = c.basis.kind == "sector" ? ModeKind::sector(c.basis.n)
                                                 : ModeKind::cutoff(c.basis.cutoffs);
  return enumerate_basis(c.schedule.N, kind);
}

bool is_mixed(const StateConfig& s) {
  return std::any_of(s.factors.begin(), s.factors.end(),
                     [](const FactorConfig& f) { return f.kind == "thermal"; });
}

Ensemble make_state(const StateConfig& s, const ExperimentConfig& c, const BasisPtr& basis) {
  if (s.kind == "fock") return {basis, {1.0}, {fock_state(basis, s.occupation).amp}};
  if (s.kind == "noon") return {basis, {1.0}, {noon_state(basis, s.modes[0] - 1, s.modes[1] - 1, s.n).amp}};

  std::vector<DensityMatrix> dens;
  std::vector<StateVector> pure;
  const bool mixed = is_mixed(s);
  for (std::size_t i = 0; i < s.factors.size(); ++i) {
    const FactorConfig& f = s.factors[i];
    const BasisPtr one = enumerate_basis(1, ModeKind::cutoff({c.basis.cutoffs[i]}));
    if (f.kind == "thermal") {
      dens.push_back(thermal_state(one, 0, f.nbar));
      continue;
    }
    StateVector v;
    if (f.kind == "fock") v = fock_state(one, {f.n});
    if (f.kind == "coherent") v = coherent_state(one, 0, f.alpha);
    if (f.kind == "cat") v = cat_state(one, 0, f.alpha);
    if (mixed)
      dens.push_back(projector(v));
    else
      pure.push_back(std::move(v));
  }
  if (!mixed) {
    StateVector p = tensor_product(pure);
    return {basis, {1.0}, {p.amp}};
  }
  DensityMatrix d = tensor_product(dens);
  d.basis = basis;
  Ensemble e = to_ensemble(d);
  e.basis = basis;
  return e;
}

AlphaRateForm rate_form(const SynthesisConfig& s) {
  return s.rate_form == "second_derivative" ? AlphaRateForm::SecondDerivative
                                            : AlphaRateForm::FirstDerivative;
}

// ---------------------------------------------------------------- observables

double observable_value(const ObservableConfig& o, const Ensemble& state, const Ensemble* target,
                        const FockBasis& basis) {
  if (o.kind == "fidelity") return fidelity_mixed(state, *target);
  if (o.kind == "overlap") return normalized_overlap(state, *target);
  double v = 0.0;
  for (std::size_t i = 0; i < state.states.size(); ++i) {
    if (o.kind == "population")
      v += state.weights[i] * population(basis, state.states[i], o.occupation);
    else
      v += state.weights[i] * noon_fidelity(basis, state.states[i], o.modes[0] - 1, o.modes[1] - 1, o.n);
  }
  return v;
}

std::string fmt15(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

void write_csv(const fs::path& p, const std::vector<double>& times,
               const std::vector<ObservableSeries>& series) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << 't';
  for (const auto& s : series) f << ',' << s.label;
  f << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    f << fmt15(times[i]);
    for (const auto& s : series) f << ',' << fmt15(s.values[i]);
    f << '\n';
  }
}

json control_sample_json(double t, const ControlSample& c) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return json{{"t", t}, {"delta", vec(c.delta)}, {"J", vec(c.J)}, {"phi", vec(c.phi)}};
}

// ---------------------------------------------------------------- verification

struct Verification {
  json report;
  double max_residual = 0.0;
  bool pass = true;
};

Verification verify_controls(const LabControls& lc, const std::vector<double>& grid, double tol) {
  Verification v;
  v.report["tolerance"] = tol;
  v.report["points"] = grid.size();
  v.report["passages"] = json::array();
  for (int k : lc.passages) {
    const ResidualReport r = verify_passage(lc, lc.frame, k, grid);
    v.max_residual = std::max(v.max_residual, r.max_residual);
    v.report["passages"].push_back({{"k", k},
                                    {"max_residual", r.max_residual},
                                    {"location", r.location},
                                    {"points", r.points}});
  }
  v.pass = v.max_residual < tol;
  v.report["max_residual"] = v.max_residual;
  v.report["pass"] = v.pass;
  return v;
}

// ---------------------------------------------------------------- checks

json evaluate_checks(const ExperimentConfig& c, const std::vector<ObservableSeries>& series,
                     bool& all_pass) {
  json out = json::array();
  auto find = [&](const std::string& label) -> const ObservableSeries& {
    for (const auto& s : series)
      if (s.label == label) return s;
    throw ConfigError("unknown observable " + label);
  };
  for (const auto& k : c.checks) {
    const ObservableSeries& s = find(k.observable);
    json r{{"label", k.label}, {"kind", k.kind}, {"observable", k.observable}};
    bool pass = true;
    if (k.kind == "value") {
      const double v = s.at(k.t);
      r["t"] = k.t;
      r["value"] = v;
      if (k.min) {
        r["min"] = *k.min;
        pass = pass && v >= *k.min;
      }
      if (k.max) {
        r["max"] = *k.max;
        pass = pass && v <= *k.max;
      }
      if (k.target) {
        r["target"] = *k.target;
        r["tol"] = k.tol;
        r["deviation"] = std::abs(v - *k.target);
        pass = pass && std::abs(v - *k.target) <= k.tol;
      }
    } else if (k.kind == "peaks") {
      std::vector<double> vals, ts;
      for (std::size_t i = 0; i < s.times.size(); ++i)
        if (s.times[i] > k.t0 && s.times[i] < k.t1) {
          ts.push_back(s.times[i]);
          vals.push_back(s.values[i]);
        }
      const auto idx = local_maxima(vals);
      json at = json::array();
      for (auto i : idx) at.push_back({{"t", ts[i]}, {"value", vals[i]}});
      r["expected"] = k.count;
      r["found"] = idx.size();
      r["peaks"] = at;
      pass = static_cast<int>(idx.size()) == k.count;
    } else {
      const double a = s.at(k.t), b = s.at(k.t + k.period);
      r["t"] = k.t;
      r["period"] = k.period;
      r["difference"] = std::abs(a - b);
      r["tol"] = k.tol;
      pass = std::abs(a - b) <= k.tol;
    }
    r["pass"] = pass;
    all_pass = all_pass && pass;
    out.push_back(r);
  }
  return out;
}

// Many-body amplitudes rebuilt from the single-particle propagator.
double oracle_deviation(const LabControls& lc, const FockBasis& basis, const Ensemble& init,
                        const TimeGrid& grid, const StateTrajectory& tr, const GridOptions& opts) {
  const auto G = single_particle_propagator(coefficient_provider(lc), basis.modes(), grid, opts);
  const CVec& psi0 = init.states.front();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < basis.dim(); ++i)
    if (std::abs(psi0(static_cast<Eigen::Index>(i))) > 0.0) support.push_back(i);
  double worst = 0.0;
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    for (std::size_t out = 0; out < basis.dim(); ++out) {
      cd amp = 0.0;
      for (std::size_t in : support)
        amp += psi0(static_cast<Eigen::Index>(in)) *
               fock_amplitudes(G.snapshots[s], basis.state(in), basis.state(out));
      worst = std::max(worst, std::abs(amp - tr.snapshots[s](static_cast<Eigen::Index>(out))));
    }
  }
  return worst;
}

template <class F>
RunResult guarded(F&& body) {
  RunResult r;
  try {
    return body();
  } catch (const ConfigError& e) {
    r = {kValidation, e.what(), {}};
  } catch (const CurveError& e) {
    r = {kValidation, e.what(), {}};
  } catch (const DomainError& e) {
    r = {kValidation, e.what(), {}};
  } catch (const BasisError& e) {
    r = {kValidation, e.what(), {}};
  } catch (const TruncationError& e) {
    r = {kValidation, e.what(), {}};
  } catch (const json::exception& e) {
    r = {kValidation, e.what(), {}};
  } catch (const SynthesisError& e) {
    r = {kSynthesis, e.what(), {}};
  } catch (const PassageError& e) {
    r = {kSynthesis, e.what(), {}};
  } catch (const IntegrationError& e) {
    r = {kIntegration, e.what(), {}};
  }
  return r;
}

void prepare_out(const fs::path& out) {
  fs::create_directories(out);
  fs::remove(out / "summary.json");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Schedule build_schedule(const ExperimentConfig& c) {
  const ScheduleConfig& s = c.schedule;
  Schedule sch;
  if (s.builder == "explicit") {
    sch = make_schedule(s.N, s.spec, s.boundaries, s.t_end);
  } else if (s.builder == "noon_chiral") {
    NoonScheduleOptions o;
    o.f_multiplier = s.f_multiplier;
    sch = build_noon_chiral_schedule(s.direction == "cw" ? Direction::Clockwise : Direction::Counterclockwise,
                                     s.loops, s.tau, o);
  } else {
    sch = build_fock_chiral_schedule(s.loops, s.tau,
                                     s.variant == "four_node" ? FockVariant::FourNode : FockVariant::ThreeNode);
  }
  validate_schedule(sch);
  return sch;
}

LabControls synthesize(const ExperimentConfig& c, const Schedule& s) {
  const SynthesisConfig& y = c.synthesis;
  if (y.method == "two_mode") return synth_two_mode(s, {y.alpha0, rate_form(y)});
  if (y.method == "two_mode_phase") return synth_two_mode_phase(s, y.omega1, y.omega2, y.omega0);
  if (y.method == "three_mode") return synth_three_mode(s, {rate_form(y)});
  FourModePhases ph;
  ph.convention = y.phase_convention;
  ph.value = y.phase_value;
  ph.constants = y.phase_constants;
  return synth_four_mode(s, ph);
}

json pulses_json(const LabControls& lc, const std::vector<double>& times) {
  json j;
  j["topology"] = layout_name(lc.topology.layout);
  j["N"] = lc.topology.N;
  j["edges"] = json::array();
  for (const auto& [r, col] : lc.topology.edges) j["edges"].push_back({r + 1, col + 1});
  j["convention"] = lc.convention;
  j["samples"] = json::array();
  for (double t : times) j["samples"].push_back(control_sample_json(t, lc.at(t)));
  return j;
}

std::pair<std::vector<double>, std::vector<ControlSample>> read_pulses(const json& j) {
  std::vector<double> ts;
  std::vector<ControlSample> ss;
  for (const auto& s : j.at("samples")) {
    ts.push_back(s.at("t").get<double>());
    auto vec = [](const json& a) {
      const auto v = a.get<std::vector<double>>();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    ss.push_back({vec(s.at("delta")), vec(s.at("J")), vec(s.at("phi"))});
  }
  if (ts.empty()) throw ConfigError("pulses file has no samples");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1])) throw ConfigError("pulse sample times must increase");
  return {ts, ss};
}

RunResult verify_experiment(const ExperimentConfig& c, const fs::path& out) {
  return guarded([&]() -> RunResult {
    prepare_out(out);
    const Schedule sch = build_schedule(c);
    const LabControls lc = synthesize(c, sch);
    write_json(out / "pulses.json",
               pulses_json(lc, stage_midpoint_grid(lc.frame, c.verify.pulse_samples_per_stage)));
    const Verification v =
        verify_controls(lc, stage_midpoint_grid(lc.frame, c.verify.points_per_stage), c.verify.residual_tol);
    write_json(out / "residuals.json", v.report);
    RunResult r;
    r.summary = v.report;
    r.exit_code = v.pass ? kSuccess : kAcceptance;
    r.message = "max residual " + fmt15(v.max_residual);
    return r;
  });
}

RunResult verify_pulses(const ExperimentConfig& c, const fs::path& pulses, const fs::path& out) {
  return guarded([&]() -> RunResult {
    fs::create_directories(out);
    std::ifstream f(pulses);
    if (!f) throw ConfigError("cannot read " + pulses.string());
    json pj;
    try {
      pj = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("pulses file: ") + e.what());
    }
    const Schedule sch = build_schedule(c);
    const LabControls exact = synthesize(c, sch);
    auto [ts, ss] = read_pulses(pj);
    for (const auto& s : ss)
      if (s.delta.size() != exact.topology.N ||
          s.J.size() != static_cast<Eigen::Index>(exact.topology.edges.size()) ||
          s.phi.size() != s.J.size())
        throw ConfigError("pulse sample size does not match the topology");
    const std::vector<double> grid = ts;
    const LabControls replay =
        tabulated_controls(exact.topology, exact.frame, std::move(ts), std::move(ss), "replay");
    LabControls with_passages = replay;
    with_passages.passages = exact.passages;
    const Verification v = verify_controls(with_passages, grid, c.verify.residual_tol);
    json report = v.report;
    report["source"] = pulses.string();
    write_json(out / "residuals.json", report);
    RunResult r;
    r.summary = report;
    r.exit_code = v.pass ? kSuccess : kAcceptance;
    r.message = "replayed max residual " + fmt15(v.max_residual);
    return r;
  });
}

RunResult run_experiment(const ExperimentConfig& c, const fs::path& out) {
  return guarded([&]() -> RunResult {
    const auto t_start = std::chrono::steady_clock::now();
    prepare_out(out);
    const BasisPtr basis = make_basis(c);
    const Ensemble init = make_state(c.initial, c, basis);
    std::vector<std::optional<Ensemble>> targets;
    for (const auto& o : c.observables)
      targets.push_back(o.kind == "fidelity" || o.kind == "overlap"
                            ? std::optional<Ensemble>(make_state(o.target, c, basis))
                            : std::nullopt);

    const Schedule sch = build_schedule(c);
    const LabControls lc = synthesize(c, sch);

    write_json(out / "pulses.json",
               pulses_json(lc, stage_midpoint_grid(lc.frame, c.verify.pulse_samples_per_stage)));
    const Verification ver =
        verify_controls(lc, stage_midpoint_grid(lc.frame, c.verify.points_per_stage), c.verify.residual_tol);
    write_json(out / "residuals.json", ver.report);

    // evolution window
    std::vector<double> edges = sch.edges();
    if (c.grid.t_stop) {
      const double stop = *c.grid.t_stop;
      if (!(stop > edges.front()) || stop > edges.back())
        throw ConfigError("/grid/t_stop: outside the schedule domain");
      std::vector<double> cut;
      for (double e : edges)
        if (e < stop) cut.push_back(e);
      cut.push_back(stop);
      edges = cut;
    }
    TimeGrid grid = TimeGrid::uniform(edges, c.grid.points_per_stage);
    std::vector<double> extra;
    for (double t : c.grid.extra_times)
      if (t >= edges.front() && t <= edges.back()) extra.push_back(t);
    for (const auto& k : c.checks)
      for (double t : {k.t, k.t + k.period})
        if (k.kind != "peaks" && t >= edges.front() && t <= edges.back()) extra.push_back(t);
    grid.with(extra);

    GridOptions opts;
    opts.steps_per_stage = c.grid.steps_per_stage;
    opts.tolerance = c.grid.tolerance;
    opts.max_refinements = c.grid.max_refinements;

    const ManyBodyOperators ops(basis);
    const auto provider = coefficient_provider(lc);
    std::vector<Ensemble> snaps;
    std::vector<double> times, drift;
    std::vector<int> steps;
    std::optional<double> oracle;
    if (init.states.size() == 1) {
      const StateVector psi0{basis, init.states.front(), 0.0};
      const StateTrajectory tr = schrodinger_evolve(provider, ops, psi0, grid, opts);
      times = tr.times;
      drift = tr.drift;
      steps = tr.steps_per_stage;
      for (const auto& v : tr.snapshots) snaps.push_back({basis, {1.0}, {v}});
      if (basis->is_sector() && basis->kind().total <= 8)
        oracle = oracle_deviation(lc, *basis, init, grid, tr, opts);
    } else {
      DensityMatrix rho0{basis, from_ensemble(init).rho, 0.0};
      const EnsembleTrajectory tr = density_evolve(provider, ops, rho0, grid, opts, c.threads);
      times = tr.times;
      drift = tr.drift;
      steps = tr.steps_per_stage;
      snaps = tr.snapshots;
    }

    std::vector<ObservableSeries> series;
    for (std::size_t i = 0; i < c.observables.size(); ++i) {
      ObservableSeries s{c.observables[i].label, times, {}};
      const Ensemble* target = targets[i] ? &*targets[i] : nullptr;
      for (const auto& e : snaps) s.values.push_back(observable_value(c.observables[i], e, target, *basis));
      series.push_back(std::move(s));
    }
    write_csv(out / "series.csv", times, series);

    bool pass = ver.pass;
    json summary;
    summary["name"] = c.name;
    summary["basis"] = {{"kind", c.basis.kind}, {"dim", basis->dim()}};
    summary["engine"] = init.states.size() == 1 ? "schrodinger" : "density";
    summary["residual"] = {{"max", ver.max_residual}, {"tolerance", c.verify.residual_tol}, {"pass", ver.pass}};
    summary["integration"] = {{"steps_per_stage", steps},
                              {"max_drift", drift.empty() ? 0.0 : *std::max_element(drift.begin(), drift.end())},
                              {"tolerance", c.grid.tolerance}};
    if (oracle) {
      const bool ok = *oracle < 1e-7;
      summary["oracle"] = {{"max_deviation", *oracle}, {"tolerance", 1e-7}, {"pass", ok}};
      pass = pass && ok;
    }
    summary["checks"] = evaluate_checks(c, series, pass);
    summary["status"] = pass ? "pass" : "fail";
    summary["exit_code"] = pass ? kSuccess : kAcceptance;
    summary["runtime_s"] = seconds_since(t_start);
    write_json(out / "summary.json", summary);

    RunResult r;
    r.summary = summary;
    r.exit_code = pass ? kSuccess : kAcceptance;
    r.message = c.name + (pass ? ": pass" : ": fail");
    return r;
  });
}

RunResult sweep(const json& config, const std::string& parameter, const json& values,
                const fs::path& out, int threads) {
  return guarded([&]() -> RunResult {
    if (!values.is_array()) throw ConfigError("sweep values must be an array");
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(parameter);
    } catch (const json::exception& e) {
      throw ConfigError("bad parameter path '" + parameter + "': " + e.what());
    }
    const json base = config_to_json(config_from_json(config));
    if (!base.contains(ptr)) throw ConfigError("parameter path '" + parameter + "' not in config");
    std::vector<ExperimentConfig> configs;
    for (const auto& v : values) {
      json j = base;
      j[ptr] = v;
      configs.push_back(config_from_json(j));
    }
    fs::create_directories(out);
    std::vector<RunResult> results(configs.size());
    auto dir = [&](std::size_t i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "run_%03zu", i);
      return std::string(buf);
    };
    const int workers = std::max(1, threads);
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w)
      pool.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < configs.size(); i += workers)
          results[i] = run_experiment(configs[i], out / dir(i));
      }));
    for (auto& f : pool) f.get();

    json index{{"parameter", parameter}, {"runs", json::array()}};
    int code = kSuccess;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      index["runs"].push_back({{"value", values[i]},
                               {"out", dir(i)},
                               {"exit_code", results[i].exit_code},
                               {"message", results[i].message}});
      if (code == kSuccess) code = results[i].exit_code;
    }
    write_json(out / "index.json", index);
    RunResult r;
    r.summary = index;
    r.exit_code = code;
    r.message = std::to_string(configs.size()) + " runs";
    return r;
  });
}

}  // namespace bosenet
