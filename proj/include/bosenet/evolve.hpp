#pragma once

#include <functional>
#include <vector>

#include "bosenet/fock.hpp"
#include "bosenet/synthesis.hpp"

namespace bosenet {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridOptions {
  int steps_per_stage = 2000;
  double tolerance = 1e-9;  // per-stage drift bound that triggers step halving
  int max_refinements = 4;
  // Geometric step grading towards every stage edge, stopping `grading_gap`
  // short of it. Controls that diverge like 1/t at an edge stay integrable.
  bool boundary_grading = true;
  double grading_gap = 1e-12;
  double grading_ratio = 0.02;
};

// Stage edges (including domain ends) and the times at which snapshots are kept.
struct TimeGrid {
  std::vector<double> edges;
  std::vector<double> outputs;

  static TimeGrid uniform(const std::vector<double>& edges, int points_per_stage);
  TimeGrid& with(const std::vector<double>& extra);
};

template <class S>
struct Trajectory {
  std::vector<double> times;
  std::vector<S> snapshots;
  std::vector<double> drift;          // norm / trace / unitarity drift at each snapshot
  std::vector<double> residual;       // optional commutation-residual series
  std::vector<int> steps_per_stage;   // accepted base step count per stage
};

using StateTrajectory = Trajectory<CVec>;
using EnsembleTrajectory = Trajectory<Ensemble>;
using PropagatorTrajectory = Trajectory<CMat>;

using CoefficientProvider = std::function<CMat(double, Side)>;
using ManyBodyProvider = std::function<SparseOp(double, Side)>;

CoefficientProvider coefficient_provider(const LabControls& controls);

StateTrajectory schrodinger_evolve(const ManyBodyProvider& H, const StateVector& psi0,
                                   const TimeGrid& grid, const GridOptions& opts = {});
// Same integrator, applying the coefficient matrix through precomputed a_j^dag a_k images.
StateTrajectory schrodinger_evolve(const CoefficientProvider& H_a, const ManyBodyOperators& ops,
                                   const StateVector& psi0, const TimeGrid& grid,
                                   const GridOptions& opts = {});

EnsembleTrajectory density_evolve(const CoefficientProvider& H_a, const ManyBodyOperators& ops,
                                  const DensityMatrix& rho0, const TimeGrid& grid,
                                  const GridOptions& opts = {}, int threads = 1);

// i dG/dt = H_a(t) G, G(0) = I.
PropagatorTrajectory single_particle_propagator(const CoefficientProvider& H_a, int N,
                                                const TimeGrid& grid,
                                                const GridOptions& opts = {});

cd permanent(const CMat& A);

// <m'| U |m> for the many-body U generated by single-particle propagator G.
cd fock_amplitudes(const CMat& G, const Occupation& m, const Occupation& m_out);

struct PassageCheck {
  double max_deviation = 0.0;
  double location = 0.0;
};

// Per stage [a, b]: G(t) G(a)^dag maps column k of M(a) onto e^{-i f_kk} times
// column k of M(t), with f_kk accumulated from a.
PassageCheck heisenberg_passage_check(const LabControls& controls, const Schedule& schedule,
                                      int k, const std::vector<double>& grid,
                                      const GridOptions& opts = {});

}  // namespace bosenet
