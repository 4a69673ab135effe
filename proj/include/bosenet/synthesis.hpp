#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bosenet/ancillary.hpp"
#include "bosenet/curves.hpp"

namespace bosenet {

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Layout { TwoMode, Triangle, Star };

struct NetworkTopology {
  int N = 0;
  Layout layout = Layout::TwoMode;
  // 0-based (row, col): the coupling J e^{i phi} multiplies a_row^dag a_col.
  std::vector<std::pair<int, int>> edges;

  static NetworkTopology two_mode();
  static NetworkTopology triangle();
  static NetworkTopology star(int N);
};

std::string layout_name(Layout l);

struct ControlSample {
  Eigen::VectorXd delta;  // per node
  Eigen::VectorXd J;      // per edge
  Eigen::VectorXd phi;    // per edge
};

struct LabControls {
  NetworkTopology topology;
  std::function<ControlSample(double, Side)> sampler;
  Schedule frame;  // completed ancillary schedule (alphas filled in)
  std::vector<int> passages;  // 1-based passages activated by construction
  std::string convention;

  ControlSample at(double t, Side side = Side::Left) const { return sampler(t, side); }
  double delta(int n, double t, Side side = Side::Left) const { return at(t, side).delta(n); }
  double J(int e, double t, Side side = Side::Left) const { return at(t, side).J(e); }
  double phi(int e, double t, Side side = Side::Left) const { return at(t, side).phi(e); }
};

// Numerator form of the alpha-rate expression: the third term carries either
// the first or the second derivative of f.
enum class AlphaRateForm { FirstDerivative, SecondDerivative };

std::string rate_form_name(AlphaRateForm f);

// Rate for a (theta, f) pair; returns 0 where theta and f are both static.
double alpha_rate(const Jet& theta, const Jet& f, AlphaRateForm form);

struct TwoModeOptions {
  double alpha0 = 0.0;
  AlphaRateForm rate_form = AlphaRateForm::FirstDerivative;
};

LabControls synth_two_mode(const Schedule& schedule, const TwoModeOptions& opts = {});

// Fixed detunings (omega_1 - omega_0, omega_2 - omega_0) with a time-dependent phase.
LabControls synth_two_mode_phase(const Schedule& schedule, double omega1, double omega2,
                                 double omega0 = 0.0);

struct ThreeModeOptions {
  AlphaRateForm rate_form = AlphaRateForm::FirstDerivative;
};

LabControls synth_three_mode(const Schedule& schedule, const ThreeModeOptions& opts = {});

struct FourModePhases {
  // Convention: phi_1 + alpha_3 = phi_2 - alpha_1 + alpha_3 = phi_3 - alpha_2 + alpha_3 = value.
  bool convention = true;
  double value = 1.5707963267948966;
  std::vector<double> constants;  // used when convention is false
};

LabControls synth_four_mode(const Schedule& schedule, const FourModePhases& phases = {});

enum class Direction { Counterclockwise, Clockwise };

struct NoonScheduleOptions {
  double f_multiplier = 3.0;  // f = m theta_2, f_1 = 0
};

Schedule build_noon_chiral_schedule(Direction dir, int loops, double tau = 1.0,
                                    const NoonScheduleOptions& opts = {});

enum class FockVariant { ThreeNode, FourNode };

Schedule build_fock_chiral_schedule(int loops, double tau = 1.0,
                                    FockVariant variant = FockVariant::ThreeNode);

CMat assemble_hamiltonian(const NetworkTopology& topo, const ControlSample& c);
CMat assemble_hamiltonian(const LabControls& controls, double t, Side side = Side::Left);

struct ResidualReport {
  int k = 0;
  double max_residual = 0.0;
  double location = 0.0;
  std::size_t points = 0;
};

ResidualReport verify_passage(const LabControls& controls, const Schedule& schedule, int k,
                              const std::vector<double>& grid);

// Midpoint grid with `per_stage` points in every stage (never on a boundary).
std::vector<double> stage_midpoint_grid(const Schedule& schedule, int per_stage);

double global_phase(const Schedule& schedule, const LabControls& controls, int k, double t0,
                    double t1, double residual_tol = 1e-8);

// Controls replayed from tabulated samples; queries off the sample times
// interpolate linearly.
LabControls tabulated_controls(const NetworkTopology& topo, const Schedule& frame,
                               std::vector<double> times, std::vector<ControlSample> samples,
                               std::string convention);

}  // namespace bosenet
