#pragma once

#include <string>
#include <vector>

#include "bosenet/fock.hpp"

namespace bosenet {

struct ObservableSeries {
  std::string label;
  std::vector<double> times;
  std::vector<double> values;

  // Linear interpolation on the series grid.
  double at(double t) const;
};

double fidelity_pure(const StateVector& psi, const StateVector& phi);
double fidelity_pure(const CVec& psi, const CVec& phi);

// Tr[rho sigma]
double fidelity_mixed(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity_mixed(const Ensemble& rho, const Ensemble& sigma);
// Tr[rho sigma] / Tr[sigma^2]
double normalized_overlap(const Ensemble& rho, const Ensemble& sigma);

double population(const StateVector& psi, const Occupation& m);
double population(const FockBasis& basis, const CVec& psi, const Occupation& m);

// j, k are 0-based mode indices.
double noon_fidelity(const FockBasis& basis, const CVec& psi, int j, int k, int n);
double noon_fidelity(const StateVector& psi, int j, int k, int n);
StateVector noon_state(BasisPtr basis, int j, int k, int n);

// Strict interior local maxima whose prominence over both neighbouring minima
// exceeds `prominence`.
std::vector<std::size_t> local_maxima(const std::vector<double>& values, double prominence = 1e-6);

}  // namespace bosenet
