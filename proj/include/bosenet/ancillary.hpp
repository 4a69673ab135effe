#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "bosenet/curves.hpp"

namespace bosenet {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

class PassageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AncillaryFrame {
  int N = 0;
  CMat M_dag;      // rows are the ancillary row vectors M_k(t)
  CMat M_dag_dot;  // elementwise time derivative
  double t = 0.0;
};

struct GaugeData {
  CMat H_mu;
  CMat A;
  CMat H_rot;
  double t = 0.0;
};

// Row vector b_k built from explicit angles (size >= k).
CVec bright_row(const std::vector<double>& theta, const std::vector<double>& alpha, int k);
CVec bright_vector(const Schedule& schedule, int k, double t, Side side = Side::Left);

// Frame from explicit angles and their rates.
AncillaryFrame transform_matrix(const std::vector<double>& theta, const std::vector<double>& alpha,
                                const std::vector<double>& theta_dot,
                                const std::vector<double>& alpha_dot);
AncillaryFrame transform_matrix(const Schedule& schedule, double t, Side side = Side::Left);

CMat gauge_potential(const AncillaryFrame& frame);
CMat gauge_potential(const Schedule& schedule, double t, Side side = Side::Left);

GaugeData rotated_coefficient(const CMat& H_a, const AncillaryFrame& frame);
GaugeData rotated_coefficient(const CMat& H_a, const Schedule& schedule, double t,
                              Side side = Side::Left);

// k is 1-based.
double commutation_residual(const GaugeData& g, int k);

// First-quantized matrix of the stationary-frame rotation; M_dag(t) W(t) = M_dag(t0).
CMat rotation_matrix(const Schedule& schedule, double t, double t0, Side side = Side::Left);
inline CMat rotation_matrix(const Schedule& schedule, double t) {
  return rotation_matrix(schedule, t, schedule.t_begin);
}

// f_kk between t0 and t1: integral of the diagonal of H_rot along passage k.
// Throws PassageError if the residual for k exceeds residual_tol on the probe grid.
double global_phase(const Schedule& schedule, const std::function<CMat(double)>& H_a, int k,
                    double t0, double t1, double residual_tol = 1e-8);

bool is_hermitian(const CMat& m, double tol);

}  // namespace bosenet
