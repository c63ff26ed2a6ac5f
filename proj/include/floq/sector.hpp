#pragma once

// Zero-momentum, reflection-even symmetry sector of the periodic chain.
//
// The symmetry group {T^k, R T^k} (translations and reflected translations,
// 2L elements) acts on computational basis states by permuting bits.  Every
// group orbit contributes one sector basis vector, the uniform superposition
//
//   |r~> = (1/sqrt(N_r)) sum_{b in orbit(r)} |b>,
//
// labeled by its smallest member r (the representative) with N_r = orbit
// size.  All characters are +1 in this sector, so no orbit is annihilated and
// the sector dimension equals the number of orbits.  A symmetric operator H
// acts through representatives as
//
//   H |r~> = sum_t c_t phase_t(r) sqrt(N_r / N_{b_t}) |b_t~>,  b_t = r ^ x_t,
//
// which keeps every sector computation at orbit-count cost.  An index table
// over the full basis (canonical representative of every b) backs the
// matrix-free kernels.

#include "floq/pauli.hpp"
#include "floq/types.hpp"

#include <cstdint>
#include <vector>

namespace floq {

std::uint64_t translate_bits(std::uint64_t b, int sites);
std::uint64_t reflect_bits(std::uint64_t b, int sites);
/// Smallest basis state in the orbit of b under {T^k, R T^k}.
std::uint64_t canonical_representative(std::uint64_t b, int sites);

/// Operator terms precompiled for the matrix-free sector kernels; restricted
/// to operators that are real in the computational basis (real coefficients,
/// even Y count per string), which covers every Hamiltonian used here.
struct CompiledRealTerm {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  Real coeff = 0;
};

class SectorBasis {
 public:
  static SectorBasis build(int sites);

  int sites() const { return sites_; }
  Index dim() const { return static_cast<Index>(reps_.size()); }
  std::uint64_t representative(Index i) const { return reps_[static_cast<std::size_t>(i)]; }
  Real orbit_size(Index i) const { return sqrt_orbit_[static_cast<std::size_t>(i)] *
                                          sqrt_orbit_[static_cast<std::size_t>(i)]; }
  /// Sector index of the orbit containing basis state b.
  Index index_of(std::uint64_t b) const;

  /// Dense sector block of a symmetric operator that is real in the
  /// computational basis (guarded by memory footprint).
  MatrixXd project_real(const PauliOperator& op) const;
  /// Dense sector block of a general symmetric operator.
  MatrixXcd project(const PauliOperator& op) const;
  /// Diagonal sector entries of an all-Z operator (orbit members share it).
  VectorXd diagonal(const PauliOperator& op) const;

  std::vector<CompiledRealTerm> compile_real(const PauliOperator& op) const;
  /// Matrix-free w = H v for a compiled real-symmetric operator.
  void apply(const std::vector<CompiledRealTerm>& terms, const VectorXd& v, VectorXd& w) const;

  /// Embeds a sector vector into the full 2^L basis (unit norm preserved).
  VectorXcd lift(const VectorXcd& sector_vec) const;
  VectorXcd lift(const VectorXd& sector_vec) const;
  /// Orthogonal projection of a full-space vector onto the sector.
  VectorXcd project_state(const VectorXcd& full) const;

 private:
  SectorBasis() = default;

  int sites_ = 0;
  std::vector<std::uint64_t> reps_;      // ascending
  std::vector<Real> sqrt_orbit_;         // sqrt(N_r) per representative
  std::vector<Real> inv_sqrt_orbit_;
  std::vector<std::int32_t> canon_index_;  // full-basis orbit index, built <= 26 sites
};

}  // namespace floq
