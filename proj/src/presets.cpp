#include <map>
#include <numbers>

#include "bosenet/experiment.hpp"

namespace bosenet {

namespace {

using std::numbers::pi;

json ramp_schedule(double f_scale) {
  return {{"builder", "explicit"},
          {"N", 2},
          {"theta", json::array({{{"segments", json::array({{{"start", 0.0},
                                                             {"end", 1.0},
                                                             {"form", "linear"},
                                                             {"c", {0.0, pi / 2}}}})}}})},
          {"phase_f", json::array({{{"ref", "theta1"}, {"scale", f_scale}}})},
          {"boundaries", json::array()},
          {"t_end", 1.0}};
}

json fock(std::vector<int> occ) { return {{"kind", "fock"}, {"occupation", occ}}; }

json product(json a, json b) { return {{"kind", "product"}, {"factors", json::array({a, b})}}; }

json population(const std::string& label, std::vector<int> occ) {
  return {{"label", label}, {"kind", "population"}, {"occupation", occ}};
}

json at_least(const std::string& obs, double t, double min) {
  return {{"label", obs + "(" + std::to_string(t).substr(0, 5) + ")"},
          {"kind", "value"},
          {"observable", obs},
          {"t", t},
          {"min", min}};
}

json near(const std::string& obs, double t, double target, double tol) {
  return {{"label", obs + "(" + std::to_string(t).substr(0, 5) + ")"},
          {"kind", "value"},
          {"observable", obs},
          {"t", t},
          {"target", target},
          {"tol", tol}};
}

json repeat(const std::string& obs, double t, double period, double tol) {
  return {{"label", obs + " repeats after " + std::to_string(static_cast<int>(period)) + " tau"},
          {"kind", "repeat"},
          {"observable", obs},
          {"t", t},
          {"period", period},
          {"tol", tol}};
}

std::string label_of(const std::vector<int>& occ) {
  std::string s = "P";
  for (int m : occ) s += std::to_string(m);
  return s;
}

json fig1a() {
  json j;
  j["name"] = "fig1a";
  j["description"] = "Two-mode Fock exchange |5,0> -> |0,5>, f = 0";
  j["schedule"] = ramp_schedule(0.0);
  j["synthesis"] = {{"method", "two_mode"}, {"alpha0", pi}};
  j["basis"] = {{"kind", "sector"}, {"n", 5}};
  j["initial"] = fock({5, 0});
  j["observables"] = json::array({population("F", {0, 5}), population("P50", {5, 0}),
                                  population("P41", {4, 1}), population("P32", {3, 2}),
                                  population("P23", {2, 3}), population("P14", {1, 4})});
  j["checks"] = json::array({at_least("F", 1.0, 1 - 1e-6), near("P41", 0.30, 0.410, 0.01),
                             near("P32", 0.44, 0.346, 0.01), near("P23", 0.558, 0.35, 0.01),
                             near("P14", 0.705, 0.41, 0.01)});
  j["grid"] = {{"points_per_stage", 200}, {"extra_times", {0.30, 0.44, 0.558, 0.705}}};
  return j;
}

json fig1a_phase() {
  json j = fig1a();
  j["name"] = "fig1a-phase";
  j["description"] = "Fig. 1(a) exchange with fixed detunings and a modulated coupling phase";
  j["schedule"].erase("phase_f");
  j["schedule"]["alpha"] =
      json::array({{{"segments", json::array({{{"start", 0.0}, {"end", 1.0}, {"form", "linear"}, {"c", {0.0, 10 * pi}}}})}}});
  j["synthesis"] = {{"method", "two_mode_phase"}, {"omega1", 20 * pi}, {"omega2", 0.0}, {"omega0", 0.0}};
  j["checks"] = json::array({at_least("F", 1.0, 1 - 1e-6)});
  return j;
}

json fig1b() {
  const json coh{{"kind", "coherent"}, {"alpha", 5.0}};
  const json five{{"kind", "fock"}, {"n", 5}};
  json j;
  j["name"] = "fig1b";
  j["description"] = "Coherent and Fock exchange |alpha,5> -> |5,alpha>, alpha = 5, f = 0";
  j["schedule"] = ramp_schedule(0.0);
  j["synthesis"] = {{"method", "two_mode"}, {"alpha0", pi}};
  j["basis"] = {{"kind", "cutoff"}, {"cutoffs", {60, 60}}};
  j["initial"] = product(coh, five);
  j["observables"] = json::array({{{"label", "F"}, {"kind", "fidelity"}, {"target", product(five, coh)}},
                                  {{"label", "F_initial"}, {"kind", "fidelity"}, {"target", product(coh, five)}}});
  j["checks"] = json::array({at_least("F", 1.0, 1 - 1e-4),
                             {{"label", "F peaks"}, {"kind", "peaks"}, {"observable", "F"},
                              {"t0", 0.0}, {"t1", 1.0}, {"count", 5}}});
  j["grid"] = {{"points_per_stage", 1000}};
  return j;
}

json fig1c() {
  const json cat{{"kind", "cat"}, {"alpha", 5.0}};
  const json vac{{"kind", "fock"}, {"n", 0}};
  json j;
  j["name"] = "fig1c";
  j["description"] = "Cat exchange |cat,0> -> |0,cat>, alpha = 5, f = 3 theta_1";
  j["schedule"] = ramp_schedule(3.0);
  j["synthesis"] = {{"method", "two_mode"}, {"alpha0", pi / 2}};
  j["basis"] = {{"kind", "cutoff"}, {"cutoffs", {60, 60}}};
  j["initial"] = product(cat, vac);
  j["observables"] = json::array({{{"label", "F"}, {"kind", "fidelity"}, {"target", product(vac, cat)}},
                                  {{"label", "F_initial"}, {"kind", "fidelity"}, {"target", product(cat, vac)}}});
  j["checks"] = json::array({at_least("F", 1.0, 1 - 1e-4)});
  j["grid"] = {{"points_per_stage", 200}};
  return j;
}

json fig1d() {
  const json th{{"kind", "thermal"}, {"nbar", 1.0}};
  const json vac{{"kind", "fock"}, {"n", 0}};
  json j;
  j["name"] = "fig1d";
  j["description"] = "Thermal exchange rho_th x |0><0| -> |0><0| x rho_th, nbar = 1, f = 3 theta_1";
  j["schedule"] = ramp_schedule(3.0);
  j["synthesis"] = {{"method", "two_mode"}, {"alpha0", pi / 2}};
  j["basis"] = {{"kind", "cutoff"}, {"cutoffs", {40, 40}}};
  j["initial"] = product(th, vac);
  j["observables"] = json::array({{{"label", "F"}, {"kind", "overlap"}, {"target", product(vac, th)}},
                                  {{"label", "F_initial"}, {"kind", "overlap"}, {"target", product(th, vac)}}});
  j["checks"] = json::array({at_least("F", 1.0, 1 - 1e-4)});
  j["grid"] = {{"points_per_stage", 200}};
  return j;
}

json noon(const std::string& name, const std::string& dir) {
  json j;
  j["name"] = name;
  j["description"] = std::string("Chiral NOON transfer, ") +
                     (dir == "ccw" ? "counterclockwise" : "clockwise") + ", two loops";
  j["schedule"] = {{"builder", "noon_chiral"}, {"direction", dir}, {"loops", 2}, {"f_multiplier", 3.0}};
  j["synthesis"] = {{"method", "three_mode"}};
  j["basis"] = {{"kind", "sector"}, {"n", 2}};
  j["initial"] = {{"kind", "noon"}, {"modes", {1, 3}}, {"n", 2}};
  j["observables"] = json::array({{{"label", "F13"}, {"kind", "noon_fidelity"}, {"modes", {1, 3}}, {"n", 2}},
                                  {{"label", "F12"}, {"kind", "noon_fidelity"}, {"modes", {1, 2}}, {"n", 2}},
                                  {{"label", "F23"}, {"kind", "noon_fidelity"}, {"modes", {2, 3}}, {"n", 2}}});
  const std::vector<std::string> seq =
      dir == "ccw" ? std::vector<std::string>{"F13", "F12", "F23", "F13"}
                   : std::vector<std::string>{"F13", "F23", "F12", "F13"};
  json checks = json::array();
  for (int s = 0; s < 4; ++s) checks.push_back(near(seq[s], s, 1.0, 1e-6));
  for (int s = 1; s < 4; ++s) checks.push_back(repeat(seq[s], s, 3.0, 1e-8));
  j["checks"] = checks;
  j["grid"] = {{"points_per_stage", 100}};
  return j;
}

json fig4a() {
  json j;
  j["name"] = "fig4a";
  j["description"] = "Four-node star, stage (i): |5,0,0,0> -> |0,5,0,0>";
  j["schedule"] = {{"builder", "fock_chiral"}, {"loops", 1}, {"variant", "three_node"}};
  j["synthesis"] = {{"method", "four_mode"}};
  j["basis"] = {{"kind", "sector"}, {"n", 5}};
  j["initial"] = fock({5, 0, 0, 0});
  json obs = json::array();
  for (const auto& occ : std::vector<std::vector<int>>{
           {5, 0, 0, 0}, {0, 5, 0, 0}, {0, 0, 2, 3}, {0, 0, 3, 2}, {0, 0, 1, 4}, {0, 0, 4, 1}, {0, 0, 5, 0}})
    obs.push_back(population(label_of(occ), occ));
  j["observables"] = obs;
  j["checks"] = json::array({at_least("P0500", 1.0, 1 - 1e-6), near("P0023", 0.5, 0.311, 0.005),
                             near("P0032", 0.5, 0.314, 0.005), near("P0014", 0.5, 0.154, 0.005),
                             near("P0041", 0.5, 0.158, 0.005), near("P0050", 0.5, 0.032, 0.005)});
  j["grid"] = {{"points_per_stage", 200}, {"t_stop", 1.0}};
  return j;
}

json fig4b() {
  json j;
  j["name"] = "fig4b";
  j["description"] = "Four-node star, chiral Fock transfer 1 -> 2 -> 3 -> 1, two loops";
  j["schedule"] = {{"builder", "fock_chiral"}, {"loops", 2}, {"variant", "three_node"}};
  j["synthesis"] = {{"method", "four_mode"}};
  j["basis"] = {{"kind", "sector"}, {"n", 5}};
  j["initial"] = fock({5, 0, 0, 0});
  j["observables"] = json::array({population("P5000", {5, 0, 0, 0}), population("P0500", {0, 5, 0, 0}),
                                  population("P0050", {0, 0, 5, 0})});
  const std::vector<std::string> seq{"P5000", "P0500", "P0050", "P5000"};
  json checks = json::array();
  for (int s = 0; s < 4; ++s) checks.push_back(near(seq[s], s, 1.0, 1e-6));
  for (int s = 1; s < 4; ++s) checks.push_back(repeat(seq[s], s, 3.0, 1e-8));
  j["checks"] = checks;
  j["grid"] = {{"points_per_stage", 100}};
  return j;
}

json fig4_fourmode() {
  json j;
  j["name"] = "fig4-fourmode";
  j["description"] = "Four-stage passage 1 -> 2 -> 3 -> 4 -> 1 on the four-node star";
  j["schedule"] = {{"builder", "fock_chiral"}, {"loops", 1}, {"variant", "four_node"}};
  j["synthesis"] = {{"method", "four_mode"}};
  j["basis"] = {{"kind", "sector"}, {"n", 5}};
  j["initial"] = fock({5, 0, 0, 0});
  j["observables"] = json::array({population("P5000", {5, 0, 0, 0}), population("P0500", {0, 5, 0, 0}),
                                  population("P0050", {0, 0, 5, 0}), population("P0005", {0, 0, 0, 5})});
  j["checks"] = json::array({near("P0500", 1.0, 1.0, 1e-6), near("P0050", 2.0, 1.0, 1e-6),
                             near("P0005", 3.0, 1.0, 1e-6), at_least("P5000", 4.0, 1 - 1e-6)});
  j["grid"] = {{"points_per_stage", 100}};
  return j;
}

const std::map<std::string, json (*)()>& catalog() {
  static const std::map<std::string, json (*)()> c{
      {"fig1a", fig1a},
      {"fig1a-phase", fig1a_phase},
      {"fig1b", fig1b},
      {"fig1c", fig1c},
      {"fig1d", fig1d},
      {"fig3a", [] { return noon("fig3a", "ccw"); }},
      {"fig3b", [] { return noon("fig3b", "cw"); }},
      {"fig4a", fig4a},
      {"fig4b", fig4b},
      {"fig4-fourmode", fig4_fourmode},
  };
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1a", "fig1b", "fig1c", "fig1d", "fig1a-phase", "fig3a", "fig3b", "fig4a", "fig4b", "fig4-fourmode"};
}

json preset_json(const std::string& name) {
  const auto& c = catalog();
  const auto it = c.find(name);
  if (it == c.end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second();
}

std::string preset_description(const std::string& name) {
  return preset_json(name).value("description", "");
}

}  // namespace bosenet
