#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bosenet/experiment.hpp"

using namespace bosenet;

namespace {

struct Common {
  std::optional<std::string> preset, config, out;
  std::optional<int> loops, steps, threads;
  std::optional<double> tolerance;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--preset", c.preset, "Named preset from the catalog");
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--out", c.out, "Output directory (default: runs/<name>, or $BOSENET_OUT)");
  app->add_option("--loops", c.loops, "Loop count for chiral presets")->check(CLI::PositiveNumber);
  app->add_option("--steps-per-stage", c.steps, "Base RK4 steps per stage")->check(CLI::Range(2, 100000000));
  app->add_option("--tolerance", c.tolerance, "Per-stage drift tolerance")->check(CLI::PositiveNumber);
  app->add_option("--threads", c.threads, "Worker threads (default: $BOSENET_THREADS or 1)")
      ->check(CLI::PositiveNumber);
}

json load(const Common& c) {
  if (c.preset.has_value() == c.config.has_value())
    throw ConfigError("give exactly one of --preset or --config");
  json j;
  if (c.preset) {
    j = preset_json(*c.preset);
  } else {
    std::ifstream f(*c.config);
    if (!f) throw ConfigError("cannot read " + *c.config);
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError(*c.config + ": " + e.what());
    }
  }
  Overrides o;
  o.loops = c.loops;
  o.steps_per_stage = c.steps;
  o.tolerance = c.tolerance;
  o.threads = resolve_threads(c.threads, j.value("threads", 1));
  return apply_overrides(j, o);
}

int report(const RunResult& r) {
  std::cout << r.message << '\n';
  if (r.exit_code != kSuccess) std::cerr << "exit " << r.exit_code << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bosonic network passage synthesis and simulation"};
  app.require_subcommand(1);

  Common run_opts, verify_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "Synthesize, verify, evolve and score an experiment");
  add_common(run, run_opts);

  auto* verify = app.add_subcommand("verify", "Synthesize and verify the controls only");
  add_common(verify, verify_opts);
  std::optional<std::string> pulses;
  verify->add_option("--pulses", pulses, "Replay a pulses.json file instead of the synthesized controls");

  auto* sw = app.add_subcommand("sweep", "Run one experiment per parameter value");
  add_common(sw, sweep_opts);
  std::string parameter, values_text;
  sw->add_option("--parameter", parameter, "JSON pointer into the config, e.g. /grid/steps_per_stage")->required();
  sw->add_option("--values", values_text, "JSON array of values, e.g. '[1000,2000]'")->required();

  auto* presets = app.add_subcommand("presets", "List the preset catalog");
  bool as_json = false;
  std::optional<std::string> show;
  presets->add_flag("--json", as_json, "Print the catalog as JSON");
  presets->add_option("--show", show, "Print the explicit configuration of one preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      if (show) {
        std::cout << config_to_json(config_from_json(preset_json(*show))).dump(2) << '\n';
        return kSuccess;
      }
      json list = json::array();
      for (const auto& n : preset_names()) list.push_back({{"name", n}, {"description", preset_description(n)}});
      if (as_json) {
        std::cout << list.dump(2) << '\n';
      } else {
        for (const auto& e : list)
          std::printf("%-14s %s\n", e["name"].get<std::string>().c_str(), e["description"].get<std::string>().c_str());
      }
      return kSuccess;
    }
    if (*run) {
      const ExperimentConfig c = config_from_json(load(run_opts));
      return report(run_experiment(c, resolve_out_dir(run_opts.out, "runs/" + c.name)));
    }
    if (*verify) {
      const ExperimentConfig c = config_from_json(load(verify_opts));
      const auto out = resolve_out_dir(verify_opts.out, "runs/" + c.name);
      return report(pulses ? verify_pulses(c, *pulses, out) : verify_experiment(c, out));
    }
    const json base = load(sweep_opts);
    json values;
    try {
      values = json::parse(values_text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("--values: ") + e.what());
    }
    const std::string name = base.value("name", "custom");
    return report(sweep(base, parameter, values, resolve_out_dir(sweep_opts.out, "runs/" + name + "-sweep"),
                        resolve_threads(sweep_opts.threads, 1)));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kValidation;
  }
}
