#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bosenet/synthesis.hpp"
#include "support.hpp"

using namespace bosenet;
using std::numbers::pi;

namespace {

Schedule two_mode_ramp(double fmul) {
  Schedule s;
  s.N = 2;
  s.theta = {Curve::linear(0.0, pi / 2, 0.0, 1.0)};
  s.phase_f = {Curve::scaled(s.theta[0], fmul)};
  return s;
}

double max_residual(const LabControls& lc, int per_stage = 200) {
  double m = 0.0;
  const auto grid = stage_midpoint_grid(lc.frame, per_stage);
  for (int k : lc.passages) m = std::max(m, verify_passage(lc, lc.frame, k, grid).max_residual);
  return m;
}

LabControls scale_coupling(LabControls lc, double factor) {
  auto inner = lc.sampler;
  lc.sampler = [inner, factor](double t, Side s) {
    ControlSample c = inner(t, s);
    c.J *= factor;
    return c;
  };
  return lc;
}

}  // namespace

TEST_CASE("two-mode synthesis without phase modulation") {
  const LabControls lc = synth_two_mode(two_mode_ramp(0.0));
  for (double t : {0.1, 0.5, 0.9}) {
    const ControlSample c = lc.at(t);
    CHECK(std::abs(c.delta(0)) < 1e-15);
    CHECK(c.J(0) == doctest::Approx(-pi / 2));
  }
  CHECK(max_residual(lc) < 1e-10);
  CHECK(max_residual(scale_coupling(lc, 1.01)) > 1e-3);
}

TEST_CASE("two-mode synthesis with f = 3 theta") {
  const LabControls lc = synth_two_mode(two_mode_ramp(3.0));
  for (double t : {0.1, 0.37, 0.8}) {
    const double th = pi * t / 2;
    CHECK(lc.J(0, t) == doctest::Approx(-(pi / 2) * std::sqrt(1 + 9 * std::pow(std::sin(2 * th), 2))));
    // closed-form alpha for linear theta and f = 3 theta
    CHECK(lc.frame.alpha[0].value(t) == doctest::Approx(std::atan(3 * std::sin(2 * th))).epsilon(1e-12));
  }
  CHECK(max_residual(lc) < 1e-10);
}

TEST_CASE("alpha-rate numerator forms are discriminated by closure") {
  TwoModeOptions bad;
  bad.rate_form = AlphaRateForm::SecondDerivative;
  CHECK(max_residual(synth_two_mode(two_mode_ramp(3.0), bad)) > 1e-3);
  CHECK(max_residual(synth_two_mode(two_mode_ramp(3.0))) < 1e-10);
}

TEST_CASE("idle two-mode schedule") {
  Schedule s;
  s.N = 2;
  s.theta = {Curve::constant(0.3, 0, 1)};
  s.phase_f = {Curve::constant(1.0, 0, 1)};
  const LabControls lc = synth_two_mode(s);
  CHECK(lc.delta(0, 0.5) == 0.0);
  CHECK(lc.J(0, 0.5) == 0.0);
}

TEST_CASE("two-mode closure on curved schedules and J consistency") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Schedule s;
    s.N = 2;
    s.theta = {Curve({Segment{0, 1, sinusoidal_form(0.2 + 0.1 * u(rng), 0.8 + 0.1 * u(rng), 1.3, 0.3 * std::abs(u(rng)))}})};
    s.phase_f = {Curve({Segment{0, 1, sinusoidal_form(u(rng), 2 * u(rng), 2.0 * u(rng) + 0.5, 0.5)}})};
    TwoModeOptions o;
    o.alpha0 = u(rng);
    const LabControls lc = synth_two_mode(s, o);
    CHECK(max_residual(lc) < 1e-10);
    for (double t : {0.2, 0.6}) {
      const double sn = std::sin(lc.phi(0, t) + lc.frame.alpha[0].value(t));
      if (std::abs(sn) > 0.1)
        CHECK(std::abs(s.theta[0].eval(t).d1 / sn) == doctest::Approx(std::abs(lc.J(0, t))).epsilon(1e-10));
    }
  }
}

TEST_CASE("phase-modulated two-mode synthesis") {
  const double dw = 20 * pi;
  SUBCASE("alpha locked to half the frequency offset") {
    Schedule s = two_mode_ramp(0.0);
    s.phase_f.clear();
    s.alpha = {Curve::linear(0.0, dw / 2, 0, 1)};
    const LabControls lc = synth_two_mode_phase(s, dw, 0.0);
    CHECK(max_residual(lc) < 1e-10);
    CHECK(lc.J(0, 0.5) == doctest::Approx(-pi / 2));
    CHECK(lc.delta(0, 0.3) == doctest::Approx(dw));
  }
  SUBCASE("static theta gives phi = -alpha") {
    Schedule s;
    s.N = 2;
    s.theta = {Curve::constant(0.4, 0, 1)};
    s.alpha = {Curve::linear(0.3, 1.0, 0, 1)};
    const LabControls lc = synth_two_mode_phase(s, 5.0, 1.0);
    CHECK(std::remainder(lc.phi(0, 0.5) + s.alpha[0].value(0.5), 2 * pi) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("regular schedule away from cos 2theta = 0") {
    Schedule s;
    s.N = 2;
    s.theta = {Curve::linear(0.1, 0.5, 0, 1)};
    s.alpha = {Curve({Segment{0, 1, sinusoidal_form(0.2, 0.7, 2.0, 0.1)}})};
    const LabControls lc = synth_two_mode_phase(s, 7.0, 2.0);
    CHECK(max_residual(lc) < 1e-10);
  }
  SUBCASE("unlocked alpha is singular where cos 2theta vanishes") {
    Schedule s = two_mode_ramp(0.0);
    s.phase_f.clear();
    s.alpha = {Curve::constant(0.0, 0, 1)};
    const LabControls lc = synth_two_mode_phase(s, dw, 0.0);
    CHECK_THROWS_AS(lc.at(0.5), SynthesisError);
    const double t = 0.3;
    CHECK(std::abs(std::tan(lc.phi(0, t))) ==
          doctest::Approx(std::abs(4 * (pi / 2) * std::cos(pi * t) / (dw * std::sin(pi * t)))));
  }
}

TEST_CASE("three-mode synthesis") {
  SUBCASE("plain ramps") {
    Schedule s;
    s.N = 3;
    s.theta = {Curve::linear(0, pi / 2, 0, 1), Curve::linear(0, pi / 2, 0, 1)};
    s.phase_f = {Curve::constant(0, 0, 1), Curve::constant(0, 0, 1)};
    const LabControls lc = synth_three_mode(s);
    CHECK(max_residual(lc) < 1e-10);
    const ControlSample c = lc.at(0.4);
    CHECK(std::abs(c.delta(2)) < 1e-14);  // Delta
    CHECK(std::abs(c.delta(0) + c.delta(1) + c.delta(2)) < 1e-14);
    CHECK(c.J(1) / c.J(2) == doctest::Approx(std::tan(pi * 0.4 / 2)));
    CHECK(std::hypot(c.J(1), c.J(2)) == doctest::Approx(pi / 2));
  }
  SUBCASE("coupling ratio follows tan theta_1") {
    Schedule s;
    s.N = 3;
    s.theta = {Curve::linear(pi / 4, 0.3, 0, 1, 0.5), Curve::linear(0.2, 0.9, 0, 1)};
    s.phase_f = {Curve::linear(0, 0.5, 0, 1), Curve::linear(0.0, 1.1, 0, 1)};
    const LabControls lc = synth_three_mode(s);
    CHECK(lc.J(1, 0.5) / lc.J(2, 0.5) == doctest::Approx(1.0));
    CHECK(max_residual(lc) < 1e-10);
  }
  SUBCASE("curved schedules close") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 8; ++trial) {
      Schedule s;
      s.N = 3;
      for (int k = 0; k < 2; ++k)
        s.theta.push_back(Curve({Segment{0, 1, sinusoidal_form(0.3 + 0.2 * u(rng), 0.9, 1.4 + 0.2 * u(rng), 0.2)}}));
      for (int k = 0; k < 2; ++k)
        s.phase_f.push_back(Curve({Segment{0, 1, sinusoidal_form(u(rng), 1.5 * u(rng), 1.0 + u(rng), 0.4)}}));
      CHECK(max_residual(synth_three_mode(s)) < 1e-10);
    }
  }
  SUBCASE("chiral NOON schedules close in every stage") {
    for (Direction d : {Direction::Counterclockwise, Direction::Clockwise}) {
      const LabControls lc = synth_three_mode(build_noon_chiral_schedule(d, 2));
      CHECK(max_residual(lc) < 1e-10);
    }
  }
}

TEST_CASE("four-mode synthesis") {
  SUBCASE("static theta_2 gives J_3 = -theta_3' cos theta_2") {
    Schedule s;
    s.N = 4;
    s.theta = {Curve::linear(0.3, 0.5, 0, 1), Curve::constant(0.7, 0, 1), Curve::linear(0.4, 0.6, 0, 1)};
    const LabControls lc = synth_four_mode(s);
    CHECK(lc.J(2, 0.3) == doctest::Approx(-0.6 * std::cos(0.7)));
    CHECK(max_residual(lc) < 1e-10);
  }
  SUBCASE("idle") {
    Schedule s;
    s.N = 4;
    s.theta = {Curve::constant(0.3, 0, 1), Curve::constant(0.2, 0, 1), Curve::constant(1.0, 0, 1)};
    const ControlSample c = synth_four_mode(s).at(0.5);
    CHECK(c.J.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("chiral Fock schedules close") {
    const LabControls lc = synth_four_mode(build_fock_chiral_schedule(2));
    CHECK(verify_passage(lc, lc.frame, 4, {0.25}).max_residual < 1e-10);
    CHECK(max_residual(lc) < 1e-10);
    CHECK(max_residual(synth_four_mode(build_fock_chiral_schedule(1, 1.0, FockVariant::FourNode))) < 1e-10);
  }
  SUBCASE("time-dependent alphas and arbitrary constant phases close") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 8; ++trial) {
      Schedule s;
      s.N = 4;
      for (int k = 0; k < 3; ++k) {
        s.theta.push_back(Curve({Segment{0, 1, sinusoidal_form(0.5 + 0.2 * u(rng), 0.4, 1.1, 0.2)}}));
        s.alpha.push_back(Curve({Segment{0, 1, sinusoidal_form(u(rng), u(rng), 2.0, 0.3)}}));
      }
      FourModePhases ph;
      if (trial % 2) {
        ph.convention = false;
        ph.constants = {0.7 + u(rng), 2.0 + u(rng), -1.9 + u(rng)};
      }
      try {
        CHECK(max_residual(synth_four_mode(s, ph)) < 1e-10);
      } catch (const SynthesisError&) {
        // phase argument crossed zero for this draw
      }
    }
  }
}

TEST_CASE("chiral schedule builders") {
  const Schedule ccw = build_noon_chiral_schedule(Direction::Counterclockwise, 2);
  CHECK(ccw.theta[0].value(0.0) == 0.0);
  CHECK(ccw.theta[0].value(1.0) == doctest::Approx(pi / 2));
  CHECK(ccw.theta[1].value(0.4) == ccw.theta[0].value(0.4));
  CHECK(ccw.theta[0].value(1.0, Side::Right) == doctest::Approx(0.0));
  CHECK(ccw.theta[0].value(2.0, Side::Right) == doctest::Approx(pi));
  CHECK(ccw.theta[1].value(2.0, Side::Right) == doctest::Approx(pi / 2));
  CHECK(ccw.theta[0].value(3.0) == doctest::Approx(pi / 2));
  CHECK(ccw.theta[1].value(3.0) == doctest::Approx(pi));
  CHECK(ccw.edges()[3] == 3.0);
  CHECK(ccw.theta[0].value(3.0, Side::Right) == 0.0);

  const Schedule cw = build_noon_chiral_schedule(Direction::Clockwise, 1);
  CHECK(cw.theta[0].value(0.0) == doctest::Approx(pi / 2));
  CHECK(cw.theta[1].value(0.0) == 0.0);

  const Schedule f3 = build_fock_chiral_schedule(1);
  for (int k = 0; k < 3; ++k) CHECK(f3.theta[k].value(0.0) == doctest::Approx(pi / 2));
  CHECK(f3.theta[2].value(0.5) == doctest::Approx(3 * pi / 4));
  CHECK(f3.theta[0].value(1.0) == doctest::Approx(pi));
  CHECK(f3.theta[2].value(1.0) == doctest::Approx(pi / 2));
  CHECK(std::abs(std::sin(f3.theta[1].value(2.0))) < 1e-15);  // theta_2(2 tau) = 0 mod pi

  const Schedule f4 = build_fock_chiral_schedule(1, 1.0, FockVariant::FourNode);
  CHECK(f4.theta[2].value(3.0) == doctest::Approx(pi));
  CHECK(f4.theta[2].value(4.0) == doctest::Approx(pi / 2));
  CHECK(f4.t_end == 4.0);
}

TEST_CASE("stage-one rows carry a1->a2, a2->a3, a3->a1") {
  const LabControls lc = synth_three_mode(build_noon_chiral_schedule(Direction::Counterclockwise, 1));
  const CMat M0 = transform_matrix(lc.frame, 0.0).M_dag.cwiseAbs().cast<cd>();
  const CMat M1 = transform_matrix(lc.frame, 1.0).M_dag.cwiseAbs().cast<cd>();
  CHECK((M0 - CMat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CMat perm = CMat::Zero(3, 3);
  perm(0, 1) = perm(1, 2) = perm(2, 0) = 1.0;
  CHECK((M1 - perm).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assembled coefficient matrix") {
  ControlSample c;
  c.delta = Eigen::Vector2d(0, 0);
  c.J = Eigen::VectorXd::Constant(1, -pi / 2);
  c.phi = Eigen::VectorXd::Constant(1, 0.3);
  const CMat H = assemble_hamiltonian(NetworkTopology::two_mode(), c);
  CHECK(std::abs(H(0, 1) - (-pi / 2) * std::exp(cd(0, 0.3))) < 1e-15);
  CHECK(std::abs(H(1, 0) - (-pi / 2) * std::exp(cd(0, -0.3))) < 1e-15);
  std::mt19937 rng(2);
  std::normal_distribution<double> n;
  for (auto topo : {NetworkTopology::triangle(), NetworkTopology::star(5)}) {
    ControlSample r;
    r.delta = Eigen::VectorXd::NullaryExpr(topo.N, [&] { return n(rng); });
    r.J = Eigen::VectorXd::NullaryExpr(topo.edges.size(), [&] { return n(rng); });
    r.phi = Eigen::VectorXd::NullaryExpr(topo.edges.size(), [&] { return n(rng); });
    const CMat Hr = assemble_hamiltonian(topo, r);
    CHECK((Hr - Hr.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("verification of a zero Hamiltonian on a static frame") {
  Schedule s;
  s.N = 2;
  s.theta = {Curve::constant(0.2, 0, 1)};
  s.alpha = {Curve::constant(0.1, 0, 1)};
  LabControls lc;
  lc.topology = NetworkTopology::two_mode();
  lc.frame = s;
  lc.sampler = [](double, Side) {
    return ControlSample{Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  };
  CHECK(verify_passage(lc, s, 1, {0.1, 0.5}).max_residual == 0.0);
  CHECK(global_phase(s, lc, 1, 0.0, 1.0) == 0.0);
}

TEST_CASE("global phases against closed forms") {
  SUBCASE("two-mode: f_11 = f, f_22 = -f") {
    for (double m : {0.0, 3.0}) {
      const LabControls lc = synth_two_mode(two_mode_ramp(m));
      const double f = m * pi / 2;
      CHECK(global_phase(lc.frame, lc, 1, 0.0, 1.0) == doctest::Approx(f).epsilon(1e-8));
      CHECK(global_phase(lc.frame, lc, 2, 0.0, 1.0) == doctest::Approx(-f).epsilon(1e-8));
    }
  }
  SUBCASE("three-mode: f_33 - f_22 = 2 f") {
    Schedule s;
    s.N = 3;
    s.theta = {Curve::linear(0.1, 0.8, 0, 1), Curve::linear(0.2, 1.0, 0, 1)};
    s.phase_f = {Curve::linear(0.0, 0.6, 0, 1), Curve::linear(0.0, 1.7, 0, 1)};
    const LabControls lc = synth_three_mode(s);
    const double t = 0.8;
    const double f11 = global_phase(lc.frame, lc, 1, 0.0, t);
    const double f22 = global_phase(lc.frame, lc, 2, 0.0, t);
    const double f33 = global_phase(lc.frame, lc, 3, 0.0, t);
    CHECK(f33 - f22 == doctest::Approx(2 * 1.7 * t).epsilon(1e-8));
    CHECK(f11 == doctest::Approx(-0.6 * t).epsilon(1e-8));
    CHECK(f22 + f33 == doctest::Approx(0.6 * t).epsilon(1e-8));
  }
  SUBCASE("inactive passage is rejected") {
    LabControls lc = scale_coupling(synth_two_mode(two_mode_ramp(0.0)), 1.1);
    CHECK_THROWS_AS(global_phase(lc.frame, lc, 1, 0.0, 1.0), PassageError);
  }
}

TEST_CASE("tabulated controls replay exactly at their sample times") {
  const LabControls lc = synth_two_mode(two_mode_ramp(3.0));
  std::vector<double> ts;
  std::vector<ControlSample> ss;
  for (double t : stage_midpoint_grid(lc.frame, 50)) {
    ts.push_back(t);
    ss.push_back(lc.at(t));
  }
  const LabControls rep = tabulated_controls(lc.topology, lc.frame, ts, ss, "replay");
  CHECK(verify_passage(rep, rep.frame, 1, ts).max_residual < 1e-12);
}
