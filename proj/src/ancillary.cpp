#include "bosenet/ancillary.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace bosenet {

namespace {

// Complex number paired with its time derivative.
struct Dual {
  cd v;
  cd d;
};

Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

Dual cos_dual(double x, double xd) { return {std::cos(x), -std::sin(x) * xd}; }
Dual sin_dual(double x, double xd) { return {std::sin(x), std::cos(x) * xd}; }

// e^{i s x / 2}
Dual half_phase(double x, double xd, double s) {
  const cd e = std::exp(cd(0.0, 0.5 * s * x));
  return {e, cd(0.0, 0.5 * s * xd) * e};
}

struct Angles {
  std::vector<double> th, al, thd, ald;
};

Angles sample_angles(const Schedule& s, double t, Side side) {
  if (!s.has_alpha()) throw CurveError("schedule has no alpha curves; synthesize first");
  Angles a;
  for (int k = 0; k < s.N - 1; ++k) {
    const Jet th = s.theta[k].eval(t, side);
    const Jet al = s.alpha[k].eval(t, side);
    a.th.push_back(th.value);
    a.thd.push_back(th.d1);
    a.al.push_back(al.value);
    a.ald.push_back(al.d1);
  }
  return a;
}

}  // namespace

bool is_hermitian(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

CVec bright_row(const std::vector<double>& theta, const std::vector<double>& alpha, int k) {
  if (k < 0 || k > static_cast<int>(theta.size()) || k > static_cast<int>(alpha.size()))
    throw std::out_of_range("bright vector index out of range");
  CVec b = CVec::Ones(1);
  for (int j = 0; j < k; ++j) {
    CVec nb(j + 2);
    const cd ep = std::exp(cd(0.0, 0.5 * alpha[j]));
    nb.head(j + 1) = std::sin(theta[j]) * ep * b;
    nb(j + 1) = std::cos(theta[j]) / ep;
    b = nb;
  }
  return b;
}

CVec bright_vector(const Schedule& schedule, int k, double t, Side side) {
  if (k < 1 || k > schedule.N - 1) throw std::out_of_range("bright vector index out of range");
  const Angles a = sample_angles(schedule, t, side);
  return bright_row(a.th, a.al, k);
}

AncillaryFrame transform_matrix(const std::vector<double>& th, const std::vector<double>& al,
                                const std::vector<double>& thd, const std::vector<double>& ald) {
  const int N = static_cast<int>(th.size()) + 1;
  AncillaryFrame f;
  f.N = N;
  f.M_dag = CMat::Zero(N, N);
  f.M_dag_dot = CMat::Zero(N, N);
  std::vector<Dual> b{{1.0, 0.0}};
  for (int k = 0; k < N - 1; ++k) {
    const Dual c = cos_dual(th[k], thd[k]);
    const Dual s = sin_dual(th[k], thd[k]);
    const Dual ep = half_phase(al[k], ald[k], 1.0);
    const Dual em = half_phase(al[k], ald[k], -1.0);
    const Dual cp = c * ep, sp = s * ep;
    for (int j = 0; j <= k; ++j) {
      const Dual e = cp * b[j];
      f.M_dag(k, j) = e.v;
      f.M_dag_dot(k, j) = e.d;
    }
    const Dual last = -(s * em);
    f.M_dag(k, k + 1) = last.v;
    f.M_dag_dot(k, k + 1) = last.d;
    std::vector<Dual> nb(k + 2);
    for (int j = 0; j <= k; ++j) nb[j] = sp * b[j];
    nb[k + 1] = c * em;
    b = std::move(nb);
  }
  for (int j = 0; j < N; ++j) {
    f.M_dag(N - 1, j) = b[j].v;
    f.M_dag_dot(N - 1, j) = b[j].d;
  }
  return f;
}

AncillaryFrame transform_matrix(const Schedule& schedule, double t, Side side) {
  const Angles a = sample_angles(schedule, t, side);
  AncillaryFrame f = transform_matrix(a.th, a.al, a.thd, a.ald);
  f.t = t;
  return f;
}

CMat gauge_potential(const AncillaryFrame& frame) {
  // A = i M^dag dM/dt, with dM/dt = (dM^dag/dt)^dag
  CMat A = cd(0.0, 1.0) * frame.M_dag * frame.M_dag_dot.adjoint();
  return 0.5 * (A + A.adjoint());
}

CMat gauge_potential(const Schedule& schedule, double t, Side side) {
  return gauge_potential(transform_matrix(schedule, t, side));
}

GaugeData rotated_coefficient(const CMat& H_a, const AncillaryFrame& frame) {
  if (H_a.rows() != frame.N || H_a.cols() != frame.N)
    throw std::invalid_argument("coefficient matrix size does not match frame");
  if (!is_hermitian(H_a, 1e-10 * std::max(1.0, H_a.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("coefficient matrix is not Hermitian");
  GaugeData g;
  g.t = frame.t;
  g.H_mu = frame.M_dag * H_a * frame.M_dag.adjoint();
  g.A = gauge_potential(frame);
  g.H_rot = g.H_mu - g.A;
  return g;
}

GaugeData rotated_coefficient(const CMat& H_a, const Schedule& schedule, double t, Side side) {
  return rotated_coefficient(H_a, transform_matrix(schedule, t, side));
}

double commutation_residual(const GaugeData& g, int k) {
  const int N = static_cast<int>(g.H_rot.rows());
  if (k < 1 || k > N) throw std::out_of_range("passage index out of range");
  const int r = k - 1;
  double m = 0.0;
  for (int j = 0; j < N; ++j) {
    if (j == r) continue;
    m = std::max({m, std::abs(g.H_rot(r, j)), std::abs(g.H_rot(j, r))});
  }
  return m;
}

CMat rotation_matrix(const Schedule& schedule, double t, double t0, Side side) {
  const int N = schedule.N;
  const Angles now = sample_angles(schedule, t, side);
  const Angles ref = sample_angles(schedule, t0, Side::Right);
  CMat W = CMat::Identity(N, N);
  const cd i(0.0, 1.0);
  for (int k = 1; k < N; ++k) {
    CVec p = CVec::Zero(N);
    p.head(k) = bright_row(ref.th, ref.al, k - 1).conjugate();
    CVec q = CVec::Zero(N);
    q(k) = 1.0;
    const CMat pp = p * p.adjoint();
    const CMat qq = q * q.adjoint();
    const double da = now.al[k - 1] - ref.al[k - 1];
    const double dt = now.th[k - 1] - ref.th[k - 1];
    const cd a0 = std::exp(i * ref.al[k - 1]);
    CMat wa = CMat::Identity(N, N) + (std::exp(-0.5 * i * da) - 1.0) * pp +
              (std::exp(0.5 * i * da) - 1.0) * qq;
    CMat wt = CMat::Identity(N, N) + (std::cos(dt) - 1.0) * (pp + qq) -
              std::sin(dt) * (a0 * q * p.adjoint() - std::conj(a0) * p * q.adjoint());
    W = W * wa * wt;
  }
  return W;
}

double global_phase(const Schedule& schedule, const std::function<CMat(double)>& H_a, int k,
                    double t0, double t1, double residual_tol) {
  if (k < 1 || k > schedule.N) throw std::out_of_range("passage index out of range");
  if (t1 == t0) return 0.0;
  const int probes = 32;
  for (int i = 0; i < probes; ++i) {
    const double t = t0 + (t1 - t0) * (i + 0.5) / probes;
    const GaugeData g = rotated_coefficient(H_a(t), schedule, t);
    if (commutation_residual(g, k) > residual_tol)
      throw PassageError("passage " + std::to_string(k) + " is not activated at t=" +
                         std::to_string(t));
  }
  auto integrand = [&](double t) {
    return rotated_coefficient(H_a(t), schedule, t).H_rot(k - 1, k - 1).real();
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double total = 0.0;
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  std::vector<double> cuts{lo};
  for (double b : schedule.boundaries)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
    total += GK::integrate(integrand, cuts[s], cuts[s + 1], 8, 1e-12);
  return t1 >= t0 ? total : -total;
}

}  // namespace bosenet
