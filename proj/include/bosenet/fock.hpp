#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bosenet/ancillary.hpp"

namespace bosenet {

class BasisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Occupation = std::vector<int>;
using SparseOp = Eigen::SparseMatrix<cd, Eigen::RowMajor>;

constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 20;

struct ModeKind {
  enum class Kind { Cutoff, Sector } kind = Kind::Sector;
  std::vector<int> cutoffs;  // Cutoff: max occupation per mode
  int total = 0;             // Sector: total excitation number

  static ModeKind cutoff(std::vector<int> c) { return {Kind::Cutoff, std::move(c), 0}; }
  static ModeKind sector(int n) { return {Kind::Sector, {}, n}; }
};

class FockBasis {
 public:
  FockBasis(int N, ModeKind kind, std::size_t cap = kDefaultDimensionCap);

  int modes() const { return N_; }
  const ModeKind& kind() const { return kind_; }
  bool is_sector() const { return kind_.kind == ModeKind::Kind::Sector; }
  std::size_t dim() const { return states_.size(); }
  const Occupation& state(std::size_t i) const { return states_[i]; }
  const std::vector<Occupation>& states() const { return states_; }
  bool contains(const Occupation& m) const;
  std::size_t index(const Occupation& m) const;  // throws BasisError when absent
  int max_occupation(int mode) const;

 private:
  std::uint64_t key(const Occupation& m) const;

  int N_;
  ModeKind kind_;
  int radix_;
  std::vector<Occupation> states_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr enumerate_basis(int N, const ModeKind& kind, std::size_t cap = kDefaultDimensionCap);

struct StateVector {
  BasisPtr basis;
  CVec amp;
  double norm_deficit = 0.0;
  double norm() const { return amp.norm(); }
};

struct DensityMatrix {
  BasisPtr basis;
  CMat rho;
  double trace_deficit = 0.0;
};

// Weighted pure-state decomposition of a density matrix.
struct Ensemble {
  BasisPtr basis;
  std::vector<double> weights;
  std::vector<CVec> states;
};

// Many-body images of the single-particle operators a_j^dag a_k.
class ManyBodyOperators {
 public:
  explicit ManyBodyOperators(BasisPtr basis);
  const FockBasis& basis() const { return *basis_; }
  const SparseOp& op(int j, int k) const { return ops_[j * N_ + k]; }
  // (sum_jk H_a(j,k) a_j^dag a_k) x
  CVec apply(const CMat& H_a, const CVec& x) const;
  SparseOp assemble(const CMat& H_a) const;

 private:
  BasisPtr basis_;
  int N_;
  std::vector<SparseOp> ops_;
};

SparseOp second_quantize(const CMat& H_a, const FockBasis& basis);

StateVector fock_state(BasisPtr basis, const Occupation& m);
StateVector coherent_state(BasisPtr basis, int mode, cd alpha, double tol = 1e-6);
StateVector cat_state(BasisPtr basis, int mode, cd alpha, double tol = 1e-6);
DensityMatrix thermal_state(BasisPtr basis, int mode, double nbar, double tol = 1e-12);

DensityMatrix projector(const StateVector& s);
Ensemble to_ensemble(const DensityMatrix& d, double cutoff = 1e-15);
DensityMatrix from_ensemble(const Ensemble& e);

// Single-mode cutoff states combine into a multi-mode cutoff basis.
StateVector tensor_product(const std::vector<StateVector>& parts);
DensityMatrix tensor_product(const std::vector<DensityMatrix>& parts);

}  // namespace bosenet
