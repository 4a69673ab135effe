#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "bosenet/evolve.hpp"
#include "bosenet/metrics.hpp"

using namespace bosenet;
using std::numbers::pi;

namespace {

const cd I(0.0, 1.0);

CMat expm_hermitian(const CMat& H, double t) {
  Eigen::SelfAdjointEigenSolver<CMat> es(H);
  const CVec ph = (-I * t * es.eigenvalues().cast<cd>()).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

CMat random_unitary(int N, std::mt19937& rng) {
  std::normal_distribution<double> n;
  CMat A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = cd(n(rng), n(rng));
  return expm_hermitian(0.5 * (A + A.adjoint()), 1.0);
}

Schedule ramp(double fmul) {
  Schedule s;
  s.N = 2;
  s.theta = {Curve::linear(0.0, pi / 2, 0.0, 1.0)};
  s.phase_f = {Curve::scaled(s.theta[0], fmul)};
  return s;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST_CASE("zero Hamiltonian leaves the state untouched") {
  const BasisPtr b = enumerate_basis(2, ModeKind::sector(3));
  const ManyBodyOperators ops(b);
  const StateVector psi = fock_state(b, {1, 2});
  const CoefficientProvider zero = [](double, Side) { return CMat::Zero(2, 2).eval(); };
  const auto tr = schrodinger_evolve(zero, ops, psi, TimeGrid::uniform({0.0, 1.0}, 4));
  for (const CVec& v : tr.snapshots) CHECK((v - psi.amp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant two-mode coupling matches the matrix exponential") {
  const double J = 0.8, d = 0.3;
  CMat H(2, 2);
  H << d / 2, J, J, -d / 2;
  const CoefficientProvider h = [&](double, Side) { return H; };
  const auto tr = single_particle_propagator(h, 2, TimeGrid::uniform({0.0, 2.0}, 8));
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    CHECK((tr.snapshots[i] - expm_hermitian(H, tr.times[i])).cwiseAbs().maxCoeff() < 1e-10);
  // resonant coupling: G = [[cos Jt, -i sin Jt], [-i sin Jt, cos Jt]]
  CMat Hr(2, 2);
  Hr << 0, J, J, 0;
  const CoefficientProvider hr = [&](double, Side) { return Hr; };
  const auto g = single_particle_propagator(hr, 2, TimeGrid::uniform({0.0, 1.0}, 1));
  const CMat& G = g.snapshots.back();
  CHECK(std::abs(G(0, 0) - std::cos(J)) < 1e-11);
  CHECK(std::abs(G(1, 0) + I * std::sin(J)) < 1e-11);
}

TEST_CASE("time-dependent diagonal accumulates the integrated phase") {
  const BasisPtr b = enumerate_basis(2, ModeKind::cutoff({2, 2}));
  const ManyBodyOperators ops(b);
  const CoefficientProvider h = [](double t, Side) {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = t * t;
    m(1, 1) = std::sin(t);
    return m;
  };
  const auto tr = schrodinger_evolve(h, ops, fock_state(b, {2, 1}), TimeGrid::uniform({0.0, 1.5}, 3));
  const double T = 1.5;
  const double phase = 2 * T * T * T / 3 + (1 - std::cos(T));
  const cd amp = tr.snapshots.back()(static_cast<Eigen::Index>(b->index({2, 1})));
  CHECK(std::abs(amp - std::exp(-I * phase)) < 1e-10);
}

TEST_CASE("stage refinement stops at the limit") {
  const CoefficientProvider bad = [](double, Side) { return (CMat::Identity(2, 2) * cd(0.0, -5.0)).eval(); };
  GridOptions o;
  o.steps_per_stage = 10;
  o.max_refinements = 2;
  CHECK_THROWS_AS(single_particle_propagator(bad, 2, TimeGrid::uniform({0.0, 1.0}, 2), o), IntegrationError);
}

TEST_CASE("permanents") {
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(permanent(CMat::Ones(n, n)) - factorial(n)) < 1e-9);
  CMat A(2, 2);
  A << 1, 2, 3, 4;
  CHECK(std::abs(permanent(A) - 10.0) < 1e-14);
  std::mt19937 rng(1);
  const CMat D = CMat(random_unitary(4, rng).diagonal().asDiagonal());
  cd prod = 1.0;
  for (int i = 0; i < 4; ++i) prod *= D(i, i);
  CHECK(std::abs(permanent(D) - prod) < 1e-14);
}

TEST_CASE("balanced splitter gives a binomial distribution") {
  CMat G(2, 2);
  G << 1, -I, -I, 1;
  G /= std::sqrt(2.0);
  for (int k = 0; k <= 5; ++k) {
    const double p = std::norm(fock_amplitudes(G, {5, 0}, {k, 5 - k}));
    CHECK(p == doctest::Approx(factorial(5) / (factorial(k) * factorial(5 - k)) / 32.0).epsilon(1e-12));
  }
}

TEST_CASE("permanent amplitudes are complete") {
  std::mt19937 rng(7);
  const CMat U = random_unitary(3, rng);
  const BasisPtr b = enumerate_basis(3, ModeKind::sector(3));
  double total = 0.0;
  for (const auto& m : b->states()) total += std::norm(fock_amplitudes(U, {1, 2, 0}, m));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(fock_amplitudes(U, {9, 0, 0}, {0, 0, 9}));
}

TEST_CASE("many-body evolution agrees with the permanent oracle") {
  const LabControls lc = synth_three_mode(build_noon_chiral_schedule(Direction::Counterclockwise, 1));
  const BasisPtr b = enumerate_basis(3, ModeKind::sector(2));
  const ManyBodyOperators ops(b);
  const auto provider = coefficient_provider(lc);
  const std::vector<double> edges = lc.frame.edges();
  const TimeGrid grid = TimeGrid::uniform(edges, 2);
  GridOptions o;
  o.steps_per_stage = 800;
  const auto psi = schrodinger_evolve(provider, ops, fock_state(b, {1, 1, 0}), grid, o);
  const auto G = single_particle_propagator(provider, 3, grid, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.times.size(); ++i)
    for (std::size_t j = 0; j < b->dim(); ++j)
      worst = std::max(worst, std::abs(psi.snapshots[i](static_cast<Eigen::Index>(j)) -
                                       fock_amplitudes(G.snapshots[i], {1, 1, 0}, b->state(j))));
  CHECK(worst < 1e-9);
}

TEST_CASE("density evolution is the weighted pure evolution") {
  const LabControls lc = synth_two_mode(ramp(3.0));
  const BasisPtr b = enumerate_basis(2, ModeKind::cutoff({4, 4}));
  const ManyBodyOperators ops(b);
  const auto provider = coefficient_provider(lc);
  const TimeGrid grid = TimeGrid::uniform({0.0, 1.0}, 4);
  const StateVector u = fock_state(b, {2, 1}), v = fock_state(b, {0, 3});
  DensityMatrix rho{b, 0.25 * projector(u).rho + 0.75 * projector(v).rho, 0.0};
  const auto mixed = density_evolve(provider, ops, rho, grid, {}, 2);
  const auto pu = schrodinger_evolve(provider, ops, u, grid);
  const auto pv = schrodinger_evolve(provider, ops, v, grid);
  for (std::size_t i = 0; i < mixed.times.size(); ++i) {
    const CMat expect = 0.25 * pu.snapshots[i] * pu.snapshots[i].adjoint() +
                        0.75 * pv.snapshots[i] * pv.snapshots[i].adjoint();
    CHECK((from_ensemble(mixed.snapshots[i]).rho - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(mixed.drift[i] < 1e-9);
  }
}

TEST_CASE("reversed negated drive undoes the evolution") {
  const LabControls lc = synth_two_mode(ramp(3.0));
  const BasisPtr b = enumerate_basis(2, ModeKind::sector(4));
  const ManyBodyOperators ops(b);
  const auto fwd = coefficient_provider(lc);
  const CoefficientProvider back = [&](double t, Side) {
    return (-assemble_hamiltonian(lc, 1.0 - t, Side::Left)).eval();
  };
  const TimeGrid grid = TimeGrid::uniform({0.0, 1.0}, 1);
  const StateVector psi0 = fock_state(b, {3, 1});
  const auto there = schrodinger_evolve(fwd, ops, psi0, grid);
  const StateVector mid{b, there.snapshots.back(), 0.0};
  const auto again = schrodinger_evolve(back, ops, mid, grid);
  CHECK((again.snapshots.back() - psi0.amp).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Heisenberg check follows the ancillary columns") {
  SUBCASE("two-mode") {
    const LabControls lc = synth_two_mode(ramp(3.0));
    const auto grid = stage_midpoint_grid(lc.frame, 20);
    for (int k : {1, 2}) CHECK(heisenberg_passage_check(lc, lc.frame, k, grid).max_deviation < 1e-8);
  }
  SUBCASE("three-mode chiral loop") {
    const LabControls lc = synth_three_mode(build_noon_chiral_schedule(Direction::Clockwise, 1));
    const auto grid = stage_midpoint_grid(lc.frame, 10);
    for (int k : {1, 2, 3}) CHECK(heisenberg_passage_check(lc, lc.frame, k, grid).max_deviation < 1e-8);
  }
  SUBCASE("four-mode dark passage") {
    const LabControls lc = synth_four_mode(build_fock_chiral_schedule(1));
    const auto grid = stage_midpoint_grid(lc.frame, 10);
    CHECK(heisenberg_passage_check(lc, lc.frame, 4, grid).max_deviation < 1e-8);
  }
}

TEST_CASE("cutoff-basis evolution agrees with the exact exponential across number blocks") {
  const BasisPtr b = enumerate_basis(2, ModeKind::cutoff({4, 4}));
  const ManyBodyOperators ops(b);
  CMat Ha(2, 2);
  Ha << 0.4, cd(0.7, 0.2), cd(0.7, -0.2), -0.1;
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  StateVector psi{b, CVec(static_cast<Eigen::Index>(b->dim())), 0.0};
  for (Eigen::Index i = 0; i < psi.amp.size(); ++i) psi.amp(i) = cd(n(rng), n(rng));
  psi.amp.normalize();

  const CoefficientProvider h = [&](double, Side) { return Ha; };
  const auto tr = schrodinger_evolve(h, ops, psi, TimeGrid::uniform({0.0, 1.5}, 3));
  const CMat H = CMat(ops.assemble(Ha));
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const CVec exact = expm_hermitian(H, tr.times[i]) * psi.amp;
    CHECK((tr.snapshots[i] - exact).norm() < 1e-9);
    CHECK(tr.drift[i] < 1e-9);
  }
}

TEST_CASE("a state confined to one number block never leaks into others") {
  const BasisPtr b = enumerate_basis(3, ModeKind::cutoff({3, 3, 3}));
  const ManyBodyOperators ops(b);
  CMat Ha = CMat::Zero(3, 3);
  Ha(0, 1) = Ha(1, 0) = 1.0;
  Ha(1, 2) = Ha(2, 1) = 0.5;
  const CoefficientProvider h = [&](double, Side) { return Ha; };
  const StateVector psi = fock_state(b, {2, 0, 1});
  const auto tr = schrodinger_evolve(h, ops, psi, TimeGrid::uniform({0.0, 2.0}, 2));
  const CVec& last = tr.snapshots.back();
  for (std::size_t i = 0; i < b->dim(); ++i) {
    const Occupation& m = b->state(i);
    if (m[0] + m[1] + m[2] != 3) CHECK(std::abs(last(static_cast<Eigen::Index>(i))) == 0.0);
  }
  CHECK(std::abs(last.norm() - 1.0) < 1e-9);
}
