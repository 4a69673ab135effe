#include "bosenet/fock.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace bosenet {

namespace {

double sector_dimension(int N, int n) {
  // C(n + N - 1, N - 1)
  double d = 1.0;
  for (int i = 1; i < N; ++i) d = d * (n + i) / i;
  return std::round(d);
}

void enumerate_sector(int N, int n, std::vector<Occupation>& out) {
  Occupation cur(N, 0);
  std::function<void(int, int)> rec = [&](int mode, int left) {
    if (mode == N - 1) {
      cur[mode] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[mode] = v;
      rec(mode + 1, left - v);
    }
  };
  rec(0, n);
}

void enumerate_cutoff(const std::vector<int>& cut, std::vector<Occupation>& out) {
  const int N = static_cast<int>(cut.size());
  Occupation cur(N, 0);
  std::function<void(int)> rec = [&](int mode) {
    if (mode == N) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= cut[mode]; ++v) {
      cur[mode] = v;
      rec(mode + 1);
    }
  };
  rec(0);
}

// log of |alpha|^n / sqrt(n!) e^{-|alpha|^2/2}, with the phase handled separately
cd coherent_amplitude(cd alpha, int n) {
  const double r = std::abs(alpha);
  if (r == 0.0) return n == 0 ? cd(1.0) : cd(0.0);
  const double logmag = -0.5 * r * r + n * std::log(r) - 0.5 * std::lgamma(n + 1.0);
  return std::exp(logmag) * std::exp(cd(0.0, n * std::arg(alpha)));
}

void require_cutoff(const FockBasis& b, const char* what) {
  if (b.is_sector()) throw BasisError(std::string(what) + " needs a per-mode cutoff basis");
}

void require_mode(const FockBasis& b, int mode) {
  if (mode < 0 || mode >= b.modes()) throw BasisError("mode index out of range");
}

bool others_vacuum(const Occupation& m, int mode) {
  for (std::size_t j = 0; j < m.size(); ++j)
    if (static_cast<int>(j) != mode && m[j] != 0) return false;
  return true;
}

int suggested_cutoff(double mean, double tol) {
  // smallest cutoff whose Poisson tail falls below tol
  double p = std::exp(-mean), tail = 1.0 - p;
  int n = 0;
  while (tail > tol && n < 100000) {
    ++n;
    p *= mean / n;
    tail -= p;
  }
  return n;
}

}  // namespace

FockBasis::FockBasis(int N, ModeKind kind, std::size_t cap) : N_(N), kind_(std::move(kind)) {
  if (N < 1) throw BasisError("basis needs at least one mode");
  double dim = 0.0;
  if (kind_.kind == ModeKind::Kind::Sector) {
    if (kind_.total < 0) throw BasisError("sector excitation number must be >= 0");
    dim = sector_dimension(N, kind_.total);
    radix_ = kind_.total + 1;
  } else {
    if (static_cast<int>(kind_.cutoffs.size()) != N) throw BasisError("one cutoff per mode");
    dim = 1.0;
    radix_ = 1;
    for (int c : kind_.cutoffs) {
      if (c < 0) throw BasisError("cutoffs must be >= 0");
      dim *= (c + 1.0);
      radix_ = std::max(radix_, c + 1);
    }
  }
  if (dim > static_cast<double>(cap))
    throw BasisError("basis dimension " + std::to_string(static_cast<long long>(dim)) +
                     " exceeds cap " + std::to_string(cap));
  if (N * std::log2(static_cast<double>(radix_)) >= 63.0)
    throw BasisError("occupation keys do not fit in 64 bits");
  states_.reserve(static_cast<std::size_t>(dim));
  if (kind_.kind == ModeKind::Kind::Sector)
    enumerate_sector(N, kind_.total, states_);
  else
    enumerate_cutoff(kind_.cutoffs, states_);
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(key(states_[i]), i);
}

std::uint64_t FockBasis::key(const Occupation& m) const {
  std::uint64_t k = 0;
  for (int v : m) k = k * static_cast<std::uint64_t>(radix_) + static_cast<std::uint64_t>(v);
  return k;
}

bool FockBasis::contains(const Occupation& m) const {
  if (static_cast<int>(m.size()) != N_) return false;
  for (int v : m)
    if (v < 0 || v >= radix_) return false;
  if (kind_.kind == ModeKind::Kind::Sector) {
    return std::accumulate(m.begin(), m.end(), 0) == kind_.total;
  }
  for (int j = 0; j < N_; ++j)
    if (m[j] > kind_.cutoffs[j]) return false;
  return true;
}

std::size_t FockBasis::index(const Occupation& m) const {
  if (!contains(m)) throw BasisError("occupation outside the basis");
  return index_.at(key(m));
}

int FockBasis::max_occupation(int mode) const {
  return kind_.kind == ModeKind::Kind::Sector ? kind_.total : kind_.cutoffs.at(mode);
}

BasisPtr enumerate_basis(int N, const ModeKind& kind, std::size_t cap) {
  return std::make_shared<const FockBasis>(N, kind, cap);
}

ManyBodyOperators::ManyBodyOperators(BasisPtr basis) : basis_(std::move(basis)) {
  N_ = basis_->modes();
  const std::size_t d = basis_->dim();
  ops_.resize(static_cast<std::size_t>(N_ * N_));
  for (int j = 0; j < N_; ++j) {
    for (int k = 0; k < N_; ++k) {
      std::vector<Eigen::Triplet<cd>> trip;
      trip.reserve(d);
      for (std::size_t c = 0; c < d; ++c) {
        Occupation m = basis_->state(c);
        if (m[k] == 0) continue;
        double coef = 0.0;
        if (j == k) {
          coef = m[k];
        } else {
          coef = std::sqrt(static_cast<double>(m[k]) * (m[j] + 1.0));
          m[k] -= 1;
          m[j] += 1;
          if (!basis_->contains(m)) continue;
        }
        trip.emplace_back(static_cast<int>(basis_->index(m)), static_cast<int>(c), coef);
      }
      SparseOp op(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      op.setFromTriplets(trip.begin(), trip.end());
      op.makeCompressed();
      ops_[j * N_ + k] = std::move(op);
    }
  }
}

CVec ManyBodyOperators::apply(const CMat& H_a, const CVec& x) const {
  CVec y = CVec::Zero(x.size());
  for (int j = 0; j < N_; ++j)
    for (int k = 0; k < N_; ++k) {
      const cd h = H_a(j, k);
      if (h != cd(0.0)) y.noalias() += h * (ops_[j * N_ + k] * x);
    }
  return y;
}

SparseOp ManyBodyOperators::assemble(const CMat& H_a) const {
  if (H_a.rows() != N_ || H_a.cols() != N_)
    throw std::invalid_argument("coefficient matrix size does not match basis");
  const auto d = static_cast<Eigen::Index>(basis_->dim());
  SparseOp H(d, d);
  for (int j = 0; j < N_; ++j)
    for (int k = 0; k < N_; ++k)
      if (H_a(j, k) != cd(0.0)) H += H_a(j, k) * ops_[j * N_ + k];
  H.makeCompressed();
  return H;
}

SparseOp second_quantize(const CMat& H_a, const FockBasis& basis) {
  if (!is_hermitian(H_a, 1e-10 * std::max(1.0, H_a.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("coefficient matrix is not Hermitian");
  ManyBodyOperators ops(std::make_shared<const FockBasis>(basis));
  return ops.assemble(H_a);
}

StateVector fock_state(BasisPtr basis, const Occupation& m) {
  StateVector s;
  s.amp = CVec::Zero(static_cast<Eigen::Index>(basis->dim()));
  s.amp(static_cast<Eigen::Index>(basis->index(m))) = 1.0;
  s.basis = std::move(basis);
  return s;
}

StateVector coherent_state(BasisPtr basis, int mode, cd alpha, double tol) {
  require_cutoff(*basis, "coherent state");
  require_mode(*basis, mode);
  StateVector s;
  s.amp = CVec::Zero(static_cast<Eigen::Index>(basis->dim()));
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    const Occupation& m = basis->state(i);
    if (others_vacuum(m, mode)) s.amp(static_cast<Eigen::Index>(i)) = coherent_amplitude(alpha, m[mode]);
  }
  s.norm_deficit = 1.0 - s.amp.squaredNorm();
  if (s.norm_deficit > tol)
    throw TruncationError("coherent state truncated: norm deficit " +
                          std::to_string(s.norm_deficit) + "; suggested cutoff " +
                          std::to_string(suggested_cutoff(std::norm(alpha), tol)));
  s.basis = std::move(basis);
  return s;
}

StateVector cat_state(BasisPtr basis, int mode, cd alpha, double tol) {
  require_cutoff(*basis, "cat state");
  require_mode(*basis, mode);
  const double r2 = std::norm(alpha);
  const double norm = std::sqrt(2.0 * (1.0 + std::exp(-2.0 * r2)));
  StateVector s;
  s.amp = CVec::Zero(static_cast<Eigen::Index>(basis->dim()));
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    const Occupation& m = basis->state(i);
    if (!others_vacuum(m, mode)) continue;
    const int n = m[mode];
    // odd terms cancel exactly
    if (n % 2 == 0) s.amp(static_cast<Eigen::Index>(i)) = 2.0 * coherent_amplitude(alpha, n) / norm;
  }
  s.norm_deficit = 1.0 - s.amp.squaredNorm();
  if (s.norm_deficit > tol)
    throw TruncationError("cat state truncated: norm deficit " + std::to_string(s.norm_deficit) +
                          "; suggested cutoff " +
                          std::to_string(suggested_cutoff(r2, tol)));
  s.basis = std::move(basis);
  return s;
}

DensityMatrix thermal_state(BasisPtr basis, int mode, double nbar, double tol) {
  require_cutoff(*basis, "thermal state");
  require_mode(*basis, mode);
  if (nbar < 0.0) throw std::invalid_argument("mean occupation must be >= 0");
  DensityMatrix d;
  const auto dim = static_cast<Eigen::Index>(basis->dim());
  d.rho = CMat::Zero(dim, dim);
  const double q = nbar / (1.0 + nbar);
  double total = 0.0;
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    const Occupation& m = basis->state(i);
    if (!others_vacuum(m, mode)) continue;
    const double p = std::pow(q, m[mode]) / (1.0 + nbar);
    d.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p;
    total += p;
  }
  d.trace_deficit = 1.0 - total;
  if (d.trace_deficit > tol)
    throw TruncationError("thermal state truncated: trace deficit " +
                          std::to_string(d.trace_deficit));
  d.basis = std::move(basis);
  return d;
}

DensityMatrix projector(const StateVector& s) {
  DensityMatrix d;
  d.basis = s.basis;
  d.rho = s.amp * s.amp.adjoint();
  d.trace_deficit = 1.0 - s.amp.squaredNorm();
  return d;
}

Ensemble to_ensemble(const DensityMatrix& d, double cutoff) {
  Ensemble e;
  e.basis = d.basis;
  const auto n = d.rho.rows();
  const CMat off = d.rho - CMat(d.rho.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = d.rho(i, i).real();
      if (w <= cutoff) continue;
      CVec v = CVec::Zero(n);
      v(i) = 1.0;
      e.weights.push_back(w);
      e.states.push_back(std::move(v));
    }
    return e;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (d.rho + d.rho.adjoint()));
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double w = es.eigenvalues()(i);
    if (w <= cutoff) continue;
    e.weights.push_back(w);
    e.states.push_back(es.eigenvectors().col(i));
  }
  return e;
}

DensityMatrix from_ensemble(const Ensemble& e) {
  DensityMatrix d;
  d.basis = e.basis;
  const auto n = static_cast<Eigen::Index>(e.basis->dim());
  d.rho = CMat::Zero(n, n);
  double tr = 0.0;
  for (std::size_t i = 0; i < e.states.size(); ++i) {
    d.rho.noalias() += e.weights[i] * e.states[i] * e.states[i].adjoint();
    tr += e.weights[i] * e.states[i].squaredNorm();
  }
  d.trace_deficit = 1.0 - tr;
  return d;
}

namespace {

BasisPtr product_basis(const std::vector<BasisPtr>& bases) {
  std::vector<int> cut;
  for (const auto& b : bases) {
    if (b->is_sector()) throw BasisError("tensor product needs per-mode cutoff bases");
    for (int c : b->kind().cutoffs) cut.push_back(c);
  }
  return enumerate_basis(static_cast<int>(cut.size()), ModeKind::cutoff(cut));
}

// Index in the product basis of the concatenation of factor states (i_0, i_1, ...).
std::vector<std::size_t> product_index_map(const std::vector<BasisPtr>& bases,
                                           const FockBasis& prod) {
  std::vector<std::size_t> map;
  std::vector<std::size_t> idx(bases.size(), 0);
  std::size_t total = 1;
  for (const auto& b : bases) total *= b->dim();
  map.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t r = flat;
    for (std::size_t f = bases.size(); f-- > 0;) {
      idx[f] = r % bases[f]->dim();
      r /= bases[f]->dim();
    }
    Occupation m;
    for (std::size_t f = 0; f < bases.size(); ++f) {
      const auto& o = bases[f]->state(idx[f]);
      m.insert(m.end(), o.begin(), o.end());
    }
    map.push_back(prod.index(m));
  }
  return map;
}

}  // namespace

StateVector tensor_product(const std::vector<StateVector>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor product of nothing");
  std::vector<BasisPtr> bases;
  for (const auto& p : parts) bases.push_back(p.basis);
  StateVector out;
  out.basis = product_basis(bases);
  const auto map = product_index_map(bases, *out.basis);
  out.amp = CVec::Zero(static_cast<Eigen::Index>(out.basis->dim()));
  std::vector<std::size_t> idx(parts.size());
  for (std::size_t flat = 0; flat < map.size(); ++flat) {
    std::size_t r = flat;
    cd a = 1.0;
    for (std::size_t f = parts.size(); f-- > 0;) {
      const std::size_t i = r % bases[f]->dim();
      r /= bases[f]->dim();
      a *= parts[f].amp(static_cast<Eigen::Index>(i));
    }
    out.amp(static_cast<Eigen::Index>(map[flat])) = a;
  }
  out.norm_deficit = 1.0 - out.amp.squaredNorm();
  return out;
}

DensityMatrix tensor_product(const std::vector<DensityMatrix>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor product of nothing");
  std::vector<BasisPtr> bases;
  for (const auto& p : parts) bases.push_back(p.basis);
  DensityMatrix out;
  out.basis = product_basis(bases);
  const auto map = product_index_map(bases, *out.basis);
  const auto n = static_cast<Eigen::Index>(out.basis->dim());
  out.rho = CMat::Zero(n, n);
  auto factor_indices = [&](std::size_t flat) {
    std::vector<std::size_t> idx(parts.size());
    for (std::size_t f = parts.size(); f-- > 0;) {
      idx[f] = flat % bases[f]->dim();
      flat /= bases[f]->dim();
    }
    return idx;
  };
  std::vector<std::vector<std::size_t>> fi(map.size());
  for (std::size_t flat = 0; flat < map.size(); ++flat) fi[flat] = factor_indices(flat);
  for (std::size_t a = 0; a < map.size(); ++a) {
    for (std::size_t b = 0; b < map.size(); ++b) {
      cd v = 1.0;
      for (std::size_t f = 0; f < parts.size() && v != cd(0.0); ++f)
        v *= parts[f].rho(static_cast<Eigen::Index>(fi[a][f]), static_cast<Eigen::Index>(fi[b][f]));
      if (v != cd(0.0)) out.rho(static_cast<Eigen::Index>(map[a]), static_cast<Eigen::Index>(map[b])) = v;
    }
  }
  out.trace_deficit = 1.0 - out.rho.trace().real();
  return out;
}

}  // namespace bosenet
