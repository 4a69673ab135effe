#include "bosenet/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bosenet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kIdle = 1e-14;

double wrap_angle(double x) { return std::remainder(x, 2.0 * kPi); }

// Side used for integrands on [a, b]: the start point belongs to the stage
// that begins there.
Side inner_side(double t, double a) { return t <= a ? Side::Right : Side::Left; }

}  // namespace

NetworkTopology NetworkTopology::two_mode() { return {2, Layout::TwoMode, {{0, 1}}}; }

NetworkTopology NetworkTopology::triangle() {
  return {3, Layout::Triangle, {{0, 1}, {0, 2}, {1, 2}}};
}

NetworkTopology NetworkTopology::star(int N) {
  if (N < 2) throw std::invalid_argument("star topology needs N >= 2");
  NetworkTopology t{N, Layout::Star, {}};
  for (int n = 0; n < N - 1; ++n) t.edges.emplace_back(N - 1, n);
  return t;
}

std::string layout_name(Layout l) {
  switch (l) {
    case Layout::TwoMode: return "two-mode";
    case Layout::Triangle: return "triangle";
    case Layout::Star: return "star";
  }
  return "unknown";
}

std::string rate_form_name(AlphaRateForm f) {
  return f == AlphaRateForm::FirstDerivative ? "first-derivative" : "second-derivative";
}

double alpha_rate(const Jet& th, const Jet& f, AlphaRateForm form) {
  const double s = std::sin(2.0 * th.value), c = std::cos(2.0 * th.value);
  const double den = f.d1 * f.d1 * s * s + th.d1 * th.d1;
  if (den < kIdle) return 0.0;
  const double third = form == AlphaRateForm::FirstDerivative ? f.d1 : f.d2;
  const double num = th.d2 * f.d1 * s - f.d2 * th.d1 * s - 2.0 * third * th.d1 * th.d1 * c;
  return -num / den;
}

CMat assemble_hamiltonian(const NetworkTopology& topo, const ControlSample& c) {
  const int N = topo.N;
  if (c.delta.size() != N || c.J.size() != static_cast<Eigen::Index>(topo.edges.size()) ||
      c.phi.size() != c.J.size())
    throw std::invalid_argument("control sample does not match topology");
  CMat H = CMat::Zero(N, N);
  for (int n = 0; n < N; ++n) H(n, n) = 0.5 * c.delta(n);
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto [r, col] = topo.edges[e];
    const cd v = c.J(e) * std::exp(cd(0.0, c.phi(e)));
    H(r, col) += v;
    H(col, r) += std::conj(v);
  }
  return H;
}

CMat assemble_hamiltonian(const LabControls& controls, double t, Side side) {
  return assemble_hamiltonian(controls.topology, controls.at(t, side));
}

// ---------------------------------------------------------------- two-mode

LabControls synth_two_mode(const Schedule& in, const TwoModeOptions& opts) {
  if (in.N != 2) throw SynthesisError("two-mode synthesis needs N = 2");
  Schedule sch = in;
  const Curve theta = sch.theta[0];
  const Curve f = sch.phase_f.empty() ? Curve::constant(0.0, sch.t_begin, sch.t_end)
                                      : sch.phase_f[0];
  const AlphaRateForm form = opts.rate_form;

  const auto edges = sch.edges();
  std::vector<Segment> segs;
  double carry = opts.alpha0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s], b = edges[s + 1];
    auto rate = [theta, f, a, form](double t) {
      const Side side = inner_side(t, a);
      return alpha_rate(theta.eval(t, side), f.eval(t, side), form);
    };
    auto fm = integrated_form(rate, a, b, carry, 1.0);
    carry = fm->eval(b).value;
    segs.push_back(Segment{a, b, fm});
  }
  sch.alpha = {Curve(std::move(segs))};

  const Jet th0 = theta.eval(sch.t_begin, Side::Right);
  const Jet f0 = f.eval(sch.t_begin, Side::Right);
  const double y = -th0.d1, x = f0.d1 * std::sin(2.0 * th0.value);
  const double beta0 = (std::abs(x) + std::abs(y) < kIdle) ? -kPi / 2 : std::atan2(y, x);
  const double phi = wrap_angle(beta0 - opts.alpha0);

  LabControls lc;
  lc.topology = NetworkTopology::two_mode();
  lc.passages = {1, 2};
  lc.convention = "two-mode detuning-modulated; rate form " + rate_form_name(form) +
                  "; phi constant = " + std::to_string(phi) +
                  " fixed by J sin(phi+alpha_1) = theta_1' at t=0; alpha_1(0) = " +
                  std::to_string(opts.alpha0);
  lc.sampler = [theta, f, phi, form](double t, Side side) {
    const Jet th = theta.eval(t, side), ff = f.eval(t, side);
    const double s2 = std::sin(2.0 * th.value), c2 = std::cos(2.0 * th.value);
    const double rate = alpha_rate(th, ff, form);
    const double delta = rate + 2.0 * ff.d1 * c2;
    const double J = -std::sqrt(th.d1 * th.d1 + ff.d1 * ff.d1 * s2 * s2);
    ControlSample c;
    c.delta = Eigen::Vector2d(delta, -delta);
    c.J = Eigen::VectorXd::Constant(1, J);
    c.phi = Eigen::VectorXd::Constant(1, phi);
    return c;
  };
  lc.frame = std::move(sch);
  return lc;
}

LabControls synth_two_mode_phase(const Schedule& in, double omega1, double omega2, double omega0) {
  if (in.N != 2) throw SynthesisError("two-mode synthesis needs N = 2");
  if (!in.has_alpha()) throw SynthesisError("phase-modulated synthesis needs an alpha_1 curve");
  const Curve theta = in.theta[0], alpha = in.alpha[0];
  const double d1 = omega1 - omega0, d2 = omega2 - omega0, dw = omega1 - omega2;

  LabControls lc;
  lc.topology = NetworkTopology::two_mode();
  lc.passages = {1, 2};
  lc.frame = in;
  lc.convention = "two-mode phase-modulated; fixed detunings, phi(t) from the closing arctan";
  lc.sampler = [theta, alpha, d1, d2, dw](double t, Side side) {
    const Jet th = theta.eval(t, side), al = alpha.eval(t, side);
    const double s2 = std::sin(2.0 * th.value), c2 = std::cos(2.0 * th.value);
    const double lever = dw - 2.0 * al.d1;
    double X = 0.0;
    if (std::abs(lever * s2) > 1e-13) {
      if (std::abs(c2) < 1e-15)
        throw SynthesisError("phase-modulated synthesis is singular at t=" + std::to_string(t));
      X = -lever * s2 / (4.0 * c2);
    }
    const double Y = th.d1;
    const double J = -std::hypot(X, Y);
    const double beta = (std::abs(X) + std::abs(Y) < kIdle) ? -kPi / 2 : std::atan2(-Y, -X);
    ControlSample c;
    c.delta = Eigen::Vector2d(d1, d2);
    c.J = Eigen::VectorXd::Constant(1, J);
    c.phi = Eigen::VectorXd::Constant(1, wrap_angle(beta - al.value));
    return c;
  };
  return lc;
}

// -------------------------------------------------------------- three-mode

namespace {

// Frame alpha for a (theta, f) pair on one stage: starts from the closing
// angle atan2(theta'/J, f' sin2theta / J) and runs against the rate.
std::shared_ptr<const Form> frame_alpha(const Curve& theta, const Curve& f, double a, double b,
                                        double fallback, AlphaRateForm form) {
  const Jet th = theta.eval(a, Side::Right), ff = f.eval(a, Side::Right);
  const double s = std::sin(2.0 * th.value);
  const double J = -std::sqrt(th.d1 * th.d1 + ff.d1 * ff.d1 * s * s);
  double a0 = fallback;
  if (std::abs(J) > kIdle) a0 = std::atan2(th.d1 / J, ff.d1 * s / J);
  auto rate = [theta, f, a, form](double t) {
    const Side side = inner_side(t, a);
    return alpha_rate(theta.eval(t, side), f.eval(t, side), form);
  };
  return integrated_form(rate, a, b, a0, -1.0);
}

}  // namespace

LabControls synth_three_mode(const Schedule& in, const ThreeModeOptions& opts) {
  if (in.N != 3) throw SynthesisError("three-mode synthesis needs N = 3");
  Schedule sch = in;
  const Curve th1 = sch.theta[0], th2 = sch.theta[1];
  const Curve zero = Curve::constant(0.0, sch.t_begin, sch.t_end);
  const Curve f1 = sch.phase_f.size() == 2 ? sch.phase_f[0] : zero;
  const Curve f = sch.phase_f.size() == 2 ? sch.phase_f[1] : zero;
  const AlphaRateForm form = opts.rate_form;

  const auto edges = sch.edges();
  std::vector<Segment> s1, s2;
  double c1 = 0.0, c2 = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s], b = edges[s + 1];
    auto a1 = frame_alpha(th1, f1, a, b, c1, form);
    auto a2 = frame_alpha(th2, f, a, b, c2, form);
    c1 = a1->eval(b).value;
    c2 = a2->eval(b).value;
    s1.push_back(Segment{a, b, a1});
    s2.push_back(Segment{a, b, a2});
  }
  sch.alpha = {Curve(std::move(s1)), Curve(std::move(s2))};
  const Curve al1 = sch.alpha[0];

  LabControls lc;
  lc.topology = NetworkTopology::triangle();
  lc.passages = {1, 2, 3};
  lc.convention = "three-mode; rate form " + rate_form_name(form) +
                  "; frame alphas restart from the closing angle at each stage start";
  lc.sampler = [th1, th2, f1, f, al1, form](double t, Side side) {
    const Jet x1 = th1.eval(t, side), x2 = th2.eval(t, side);
    const Jet g1 = f1.eval(t, side), g = f.eval(t, side);
    const double a1 = al1.eval(t, side).value;
    const double s1 = std::sin(2.0 * x1.value), s2 = std::sin(2.0 * x2.value);
    const double r1 = alpha_rate(x1, g1, form), r2 = alpha_rate(x2, g, form);
    const double Ja = -std::sqrt(x1.d1 * x1.d1 + g1.d1 * g1.d1 * s1 * s1);
    const double J = -std::sqrt(x2.d1 * x2.d1 + g.d1 * g.d1 * s2 * s2);
    const double Da = r1 + 2.0 * g1.d1 * std::cos(2.0 * x1.value);
    const double D = r2 + 2.0 * g.d1 * std::cos(2.0 * x2.value) + g1.d1;
    const double sn = std::sin(x1.value), cs = std::cos(x1.value);
    ControlSample c;
    c.delta = Eigen::Vector3d(-D * sn * sn - Da, -D * cs * cs + Da, D);
    const cd i(0.0, 1.0);
    const cd e12 = Ja - 0.5 * D * sn * cs * std::exp(-i * a1);
    const cd e13 = J * sn * std::exp(-0.5 * i * a1);
    const cd e23 = J * cs * std::exp(0.5 * i * a1);
    c.J = Eigen::Vector3d(std::abs(e12), std::abs(e13), std::abs(e23));
    c.phi = Eigen::Vector3d(std::arg(e12), std::arg(e13), std::arg(e23));
    return c;
  };
  lc.frame = std::move(sch);
  return lc;
}

// --------------------------------------------------------------- four-mode

LabControls synth_four_mode(const Schedule& in, const FourModePhases& ph) {
  if (in.N != 4) throw SynthesisError("four-mode synthesis needs N = 4");
  Schedule sch = in;
  if (!sch.has_alpha())
    sch.alpha.assign(3, Curve::constant(0.0, sch.t_begin, sch.t_end));
  if (!ph.convention && ph.constants.size() != 3)
    throw SynthesisError("four-mode synthesis needs three edge phases");
  const std::vector<Curve> th = sch.theta, al = sch.alpha;

  LabControls lc;
  lc.topology = NetworkTopology::star(4);
  lc.passages = {4};
  lc.convention = ph.convention ? "four-mode star; phase convention value " +
                                      std::to_string(ph.value)
                                : "four-mode star; constant edge phases";
  lc.sampler = [th, al, ph](double t, Side side) {
    double x[3], xd[3], a[3], ad[3];
    for (int k = 0; k < 3; ++k) {
      const Jet j = th[k].eval(t, side), b = al[k].eval(t, side);
      x[k] = j.value;
      xd[k] = j.d1;
      a[k] = b.value;
      ad[k] = b.d1;
    }
    const double s1 = std::sin(x[0]), c1 = std::cos(x[0]);
    const double s2 = std::sin(x[1]), c2 = std::cos(x[1]);
    const double s3 = std::sin(x[2]), c3 = std::cos(x[2]);
    // moduli and phases of the bright row b_3 = rho_n e^{i chi_n}
    const double rho[4] = {s3 * s2 * s1, s3 * s2 * c1, s3 * c2, c3};
    const double rhod[4] = {
        c3 * xd[2] * s2 * s1 + s3 * c2 * xd[1] * s1 + s3 * s2 * c1 * xd[0],
        c3 * xd[2] * s2 * c1 + s3 * c2 * xd[1] * c1 - s3 * s2 * s1 * xd[0],
        c3 * xd[2] * c2 - s3 * s2 * xd[1],
        -s3 * xd[2]};
    const double chi[4] = {0.5 * (a[0] + a[1] + a[2]), 0.5 * (-a[0] + a[1] + a[2]),
                           0.5 * (-a[1] + a[2]), -0.5 * a[2]};
    const double chid[4] = {0.5 * (ad[0] + ad[1] + ad[2]), 0.5 * (-ad[0] + ad[1] + ad[2]),
                            0.5 * (-ad[1] + ad[2]), -0.5 * ad[2]};
    double phi[3];
    if (ph.convention) {
      phi[0] = ph.value - a[2];
      phi[1] = ph.value + a[0] - a[2];
      phi[2] = ph.value + a[1] - a[2];
    } else {
      for (int n = 0; n < 3; ++n) phi[n] = ph.constants[n];
    }
    ControlSample c;
    c.delta = Eigen::Vector4d::Zero();
    c.J = Eigen::Vector3d::Zero();
    c.phi = Eigen::Vector3d::Zero();
    double d4 = chid[3];
    for (int n = 0; n < 3; ++n) {
      const double psi = phi[n] + chi[3] - chi[n];
      const double sp = std::sin(psi), cp = std::cos(psi);
      if (std::abs(sp) < 1e-8)
        throw SynthesisError("four-mode synthesis: phase argument near zero at t=" +
                             std::to_string(t));
      const double J = -rhod[n] / (rho[3] * sp);
      double shift = 0.0;
      if (std::abs(cp) > 1e-14) {
        shift = rhod[n] * (cp / sp) / rho[n];
        d4 += rhod[n] * rho[n] * (cp / sp) / (rho[3] * rho[3]);
      }
      c.J(n) = J;
      c.phi(n) = wrap_angle(phi[n]);
      c.delta(n) = 2.0 * (chid[n] + shift);
    }
    c.delta(3) = 2.0 * d4;
    return c;
  };
  lc.frame = std::move(sch);
  return lc;
}

// ------------------------------------------------------------ verification

std::vector<double> stage_midpoint_grid(const Schedule& schedule, int per_stage) {
  std::vector<double> g;
  const auto e = schedule.edges();
  for (std::size_t s = 0; s + 1 < e.size(); ++s) {
    const double h = (e[s + 1] - e[s]) / per_stage;
    for (int i = 0; i < per_stage; ++i) g.push_back(e[s] + (i + 0.5) * h);
  }
  return g;
}

ResidualReport verify_passage(const LabControls& controls, const Schedule& schedule, int k,
                              const std::vector<double>& grid) {
  if (controls.topology.N != schedule.N)
    throw std::invalid_argument("controls and schedule disagree on N");
  ResidualReport r;
  r.k = k;
  r.points = grid.size();
  for (double t : grid) {
    const CMat H = assemble_hamiltonian(controls, t);
    double res = std::numeric_limits<double>::infinity();
    if (H.allFinite()) {
      const GaugeData g = rotated_coefficient(H, schedule, t);
      res = commutation_residual(g, k);
      if (!std::isfinite(res)) res = std::numeric_limits<double>::infinity();
    }
    if (res > r.max_residual || t == grid.front()) {
      r.max_residual = res;
      r.location = t;
    }
  }
  return r;
}

double global_phase(const Schedule& schedule, const LabControls& controls, int k, double t0,
                    double t1, double residual_tol) {
  return global_phase(
      schedule, [&](double t) { return assemble_hamiltonian(controls, t); }, k, t0, t1,
      residual_tol);
}

LabControls tabulated_controls(const NetworkTopology& topo, const Schedule& frame,
                               std::vector<double> times, std::vector<ControlSample> samples,
                               std::string convention) {
  if (times.size() != samples.size() || times.empty())
    throw std::invalid_argument("tabulated controls need matching, non-empty samples");
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("tabulated control times must increase");
  LabControls lc;
  lc.topology = topo;
  lc.frame = frame;
  lc.convention = std::move(convention);
  auto ts = std::make_shared<const std::vector<double>>(std::move(times));
  auto ss = std::make_shared<const std::vector<ControlSample>>(std::move(samples));
  lc.sampler = [ts, ss](double t, Side) {
    const auto& T = *ts;
    const auto& S = *ss;
    auto it = std::lower_bound(T.begin(), T.end(), t);
    std::size_t i = static_cast<std::size_t>(it - T.begin());
    if (i < T.size() && std::abs(T[i] - t) <= 1e-12) return S[i];
    if (i > 0 && std::abs(T[i - 1] - t) <= 1e-12) return S[i - 1];
    if (i == 0) return S.front();
    if (i >= T.size()) return S.back();
    const double w = (t - T[i - 1]) / (T[i] - T[i - 1]);
    ControlSample c;
    c.delta = (1 - w) * S[i - 1].delta + w * S[i].delta;
    c.J = (1 - w) * S[i - 1].J + w * S[i].J;
    c.phi = (1 - w) * S[i - 1].phi + w * S[i].phi;
    return c;
  };
  return lc;
}

}  // namespace bosenet
