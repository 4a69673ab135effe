#include "bosenet/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace bosenet {

double ObservableSeries::at(double t) const {
  if (times.empty()) throw std::out_of_range("empty series");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  if (times[i] == t) return values[i];
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

double fidelity_pure(const CVec& psi, const CVec& phi) {
  if (psi.size() != phi.size()) throw BasisError("states live on different bases");
  return std::norm(phi.dot(psi));
}

double fidelity_pure(const StateVector& psi, const StateVector& phi) {
  if (psi.basis != phi.basis && psi.basis->states() != phi.basis->states())
    throw BasisError("states live on different bases");
  return fidelity_pure(psi.amp, phi.amp);
}

double fidelity_mixed(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.rho.rows() != sigma.rho.rows()) throw BasisError("densities live on different bases");
  // Tr[rho sigma] = sum_ij rho_ij sigma_ji
  return (rho.rho.array() * sigma.rho.transpose().array()).sum().real();
}

double fidelity_mixed(const Ensemble& rho, const Ensemble& sigma) {
  double total = 0.0;
  for (std::size_t i = 0; i < rho.states.size(); ++i)
    for (std::size_t j = 0; j < sigma.states.size(); ++j)
      total += rho.weights[i] * sigma.weights[j] * std::norm(sigma.states[j].dot(rho.states[i]));
  return total;
}

double normalized_overlap(const Ensemble& rho, const Ensemble& sigma) {
  return fidelity_mixed(rho, sigma) / fidelity_mixed(sigma, sigma);
}

double population(const FockBasis& basis, const CVec& psi, const Occupation& m) {
  return std::norm(psi(static_cast<Eigen::Index>(basis.index(m))));
}

double population(const StateVector& psi, const Occupation& m) {
  return population(*psi.basis, psi.amp, m);
}

StateVector noon_state(BasisPtr basis, int j, int k, int n) {
  const int N = basis->modes();
  if (j == k) throw std::invalid_argument("NOON modes must differ");
  if (j < 0 || k < 0 || j >= N || k >= N) throw std::out_of_range("NOON mode out of range");
  Occupation a(N, 0), b(N, 0);
  a[j] = n;
  b[k] = n;
  StateVector s;
  s.amp = CVec::Zero(static_cast<Eigen::Index>(basis->dim()));
  s.amp(static_cast<Eigen::Index>(basis->index(a))) += 1.0 / std::sqrt(2.0);
  s.amp(static_cast<Eigen::Index>(basis->index(b))) += 1.0 / std::sqrt(2.0);
  s.basis = std::move(basis);
  return s;
}

double noon_fidelity(const FockBasis& basis, const CVec& psi, int j, int k, int n) {
  const int N = basis.modes();
  if (j == k) throw std::invalid_argument("NOON modes must differ");
  if (j < 0 || k < 0 || j >= N || k >= N) throw std::out_of_range("NOON mode out of range");
  Occupation a(N, 0), b(N, 0);
  a[j] = n;
  b[k] = n;
  const cd amp = (psi(static_cast<Eigen::Index>(basis.index(a))) +
                  psi(static_cast<Eigen::Index>(basis.index(b)))) /
                 std::sqrt(2.0);
  return std::norm(amp);
}

double noon_fidelity(const StateVector& psi, int j, int k, int n) {
  return noon_fidelity(*psi.basis, psi.amp, j, k, n);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& v, double prominence) {
  std::vector<std::size_t> peaks;
  const std::size_t n = v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // plateau-aware: compare with the nearest differing neighbours
    std::size_t l = i, r = i;
    while (l > 0 && v[l - 1] == v[i]) --l;
    while (r + 1 < n && v[r + 1] == v[i]) ++r;
    if (l == 0 || r + 1 >= n) continue;
    if (!(v[l - 1] < v[i] && v[r + 1] < v[i])) continue;
    if (l != i) continue;  // count a plateau once
    double left_min = v[i], right_min = v[i];
    for (std::size_t a = i; a-- > 0;) {
      if (v[a] > v[i]) break;
      left_min = std::min(left_min, v[a]);
    }
    for (std::size_t b = r + 1; b < n; ++b) {
      if (v[b] > v[i]) break;
      right_min = std::min(right_min, v[b]);
    }
    if (v[i] - std::max(left_min, right_min) > prominence) peaks.push_back(i);
  }
  return peaks;
}

}  // namespace bosenet
