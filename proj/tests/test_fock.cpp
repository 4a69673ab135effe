#include <doctest.h>

#include <cmath>
#include <random>

#include "bosenet/fock.hpp"

using namespace bosenet;

namespace {

double binom(int n, int k) { return std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)); }

CMat random_hermitian(int N, std::mt19937& rng) {
  std::normal_distribution<double> n;
  CMat A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = cd(n(rng), n(rng));
  return 0.5 * (A + A.adjoint());
}

CVec random_vector(std::size_t d, std::mt19937& rng) {
  std::normal_distribution<double> n;
  CVec v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = cd(n(rng), n(rng));
  return v;
}

}  // namespace

TEST_CASE("basis dimensions") {
  CHECK(enumerate_basis(2, ModeKind::cutoff({60, 60}))->dim() == 3721);
  CHECK(enumerate_basis(3, ModeKind::sector(2))->dim() == 6);
  CHECK(enumerate_basis(4, ModeKind::sector(5))->dim() == 56);
  for (int N : {2, 3, 5})
    for (int n : {0, 1, 4})
      CHECK(enumerate_basis(N, ModeKind::sector(n))->dim() == static_cast<std::size_t>(binom(n + N - 1, N - 1)));
  CHECK_THROWS_AS(enumerate_basis(2, ModeKind::cutoff({5000, 5000}), 1000), BasisError);
}

TEST_CASE("basis indexing") {
  const BasisPtr b = enumerate_basis(3, ModeKind::sector(2));
  for (std::size_t i = 0; i < b->dim(); ++i) CHECK(b->index(b->state(i)) == i);
  CHECK(b->contains({1, 1, 0}));
  CHECK_FALSE(b->contains({1, 0, 0}));
  CHECK_THROWS_AS(b->index({3, 0, 0}), BasisError);
}

TEST_CASE("second quantization examples") {
  SUBCASE("single hop from |1,0>") {
    const BasisPtr b = enumerate_basis(2, ModeKind::sector(1));
    CMat H = CMat::Zero(2, 2);
    H(0, 1) = H(1, 0) = 0.7;
    const SparseOp op = second_quantize(H, *b);
    const CVec out = op * fock_state(b, {1, 0}).amp;
    CHECK(std::abs(out(static_cast<Eigen::Index>(b->index({0, 1}))) - 0.7) < 1e-15);
  }
  SUBCASE("sqrt 2 matrix element in the two-photon sector") {
    const BasisPtr b = enumerate_basis(2, ModeKind::sector(2));
    CMat H = CMat::Zero(2, 2);
    H(0, 1) = H(1, 0) = 0.5;
    const CMat d = CMat(second_quantize(H, *b));
    const auto i20 = static_cast<Eigen::Index>(b->index({2, 0}));
    const auto i11 = static_cast<Eigen::Index>(b->index({1, 1}));
    CHECK(std::abs(d(i11, i20) - 0.5 * std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(d(i20, i11) - 0.5 * std::sqrt(2.0)) < 1e-15);
  }
  SUBCASE("diagonal counts occupations") {
    const BasisPtr b = enumerate_basis(3, ModeKind::sector(3));
    CMat H = CMat::Zero(3, 3);
    H.diagonal() << 1.0, 2.0, -0.5;
    const CMat d = CMat(second_quantize(H, *b));
    for (std::size_t i = 0; i < b->dim(); ++i) {
      const auto& m = b->state(i);
      CHECK(std::abs(d(i, i) - (1.0 * m[0] + 2.0 * m[1] - 0.5 * m[2])) < 1e-14);
    }
  }
}

TEST_CASE("second quantization is linear, Hermitian and number conserving") {
  std::mt19937 rng(3);
  const BasisPtr b = enumerate_basis(3, ModeKind::cutoff({3, 3, 3}));
  const ManyBodyOperators ops(b);
  const CMat H1 = random_hermitian(3, rng), H2 = random_hermitian(3, rng);
  const CMat A = CMat(ops.assemble(H1));
  CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((CMat(ops.assemble(2.0 * H1 + H2)) - (2.0 * A + CMat(ops.assemble(H2)))).cwiseAbs().maxCoeff() < 1e-13);
  const CVec x = random_vector(b->dim(), rng);
  CHECK((ops.apply(H1, x) - A * x).cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t i = 0; i < b->dim(); ++i)
    for (std::size_t j = 0; j < b->dim(); ++j) {
      if (std::abs(A(i, j)) < 1e-15) continue;
      int ni = 0, nj = 0;
      for (int v : b->state(i)) ni += v;
      for (int v : b->state(j)) nj += v;
      CHECK(ni == nj);
    }
}

TEST_CASE("coherent states") {
  const BasisPtr b = enumerate_basis(2, ModeKind::cutoff({60, 60}));
  const cd alpha(5.0, 0.0);
  const StateVector s = coherent_state(b, 0, alpha);
  double tail = 0.0;
  for (int n = 61; n < 200; ++n) tail += std::exp(-25.0 + n * std::log(25.0) - std::lgamma(n + 1.0));
  CHECK(s.norm_deficit == doctest::Approx(tail).epsilon(1e-4));
  CHECK(s.amp.squaredNorm() + s.norm_deficit == doctest::Approx(1.0).epsilon(1e-14));
  for (int n : {0, 5, 25, 40}) {
    const double p = std::exp(-25.0 + n * std::log(25.0) - std::lgamma(n + 1.0));
    CHECK(std::norm(s.amp(static_cast<Eigen::Index>(b->index({n, 0})))) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(coherent_state(enumerate_basis(2, ModeKind::cutoff({30, 30})), 0, alpha), TruncationError);
  try {
    coherent_state(enumerate_basis(2, ModeKind::cutoff({30, 30})), 0, alpha);
  } catch (const TruncationError& e) {
    CHECK(std::string(e.what()).find("cutoff") != std::string::npos);
  }
}

TEST_CASE("cat states keep only even terms") {
  const BasisPtr b = enumerate_basis(1, ModeKind::cutoff({60}));
  const StateVector c = cat_state(b, 0, cd(3.0, 0.0));
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 1; n <= 60; n += 2) CHECK(c.amp(n) == cd(0.0, 0.0));
  const double p0 = 1.0 / std::cosh(9.0);
  CHECK(std::norm(c.amp(0)) == doctest::Approx(p0).epsilon(1e-10));
}

TEST_CASE("thermal states") {
  const BasisPtr b = enumerate_basis(2, ModeKind::cutoff({40, 40}));
  const DensityMatrix t = thermal_state(b, 0, 1.0);
  for (int n : {0, 1, 2, 10}) {
    const auto i = static_cast<Eigen::Index>(b->index({n, 0}));
    CHECK(t.rho(i, i).real() == doctest::Approx(std::pow(0.5, n + 1)).epsilon(1e-12));
  }
  CHECK(t.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-11));
  const Ensemble e = to_ensemble(t);
  CHECK((from_ensemble(e).rho - t.rho).cwiseAbs().maxCoeff() < 1e-14);
  // purity of a thermal state with nbar = 1 is 1/3
  double purity = 0.0;
  for (double w : e.weights) purity += w * w;
  CHECK(purity == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("ensemble decomposition of a non-diagonal density") {
  const BasisPtr b = enumerate_basis(1, ModeKind::cutoff({4}));
  std::mt19937 rng(9);
  CVec u = random_vector(5, rng).normalized(), v = random_vector(5, rng).normalized();
  DensityMatrix d{b, 0.3 * u * u.adjoint() + 0.7 * v * v.adjoint(), 0.0};
  CHECK((from_ensemble(to_ensemble(d)).rho - d.rho).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("tensor products") {
  const BasisPtr one = enumerate_basis(1, ModeKind::cutoff({3}));
  const StateVector a = fock_state(one, {1}), c = fock_state(one, {2});
  const StateVector ac = tensor_product({a, c});
  CHECK(ac.basis->modes() == 2);
  CHECK(std::abs(ac.amp(static_cast<Eigen::Index>(ac.basis->index({1, 2}))) - 1.0) < 1e-15);
  const DensityMatrix pa = projector(a), pc = projector(c);
  const DensityMatrix pac = tensor_product(std::vector<DensityMatrix>{pa, pc});
  CHECK((pac.rho - projector(ac).rho).cwiseAbs().maxCoeff() < 1e-15);
}
