#pragma once

// Sector eigensystems: effective Hamiltonians (dense or Lanczos) and the
// Floquet eigenproblem of the one-cycle unitary.
//
// Within the zero-momentum reflection-even sector the cycle unitary is
// T_sec(tau) = D(tau/2) exp(-i H2_sec tau) D(tau/2) with D diagonal (orbit
// members share their H1 energy), so a tau sweep reuses one symmetric
// eigendecomposition of H2_sec.  Floquet modes solve T |theta> =
// exp(-i theta) |theta> with theta folded to [-pi, pi).

#include "floq/pauli.hpp"
#include "floq/sector.hpp"
#include "floq/types.hpp"

#include <vector>

namespace floq {

struct SectorEigensystem {
  VectorXd energies;  // ascending
  MatrixXd vectors;   // orthonormal columns, sector coordinates
};

struct EigenPair {
  Index index = 0;
  Real energy = 0;
  VectorXd vector;
};

enum class SpectrumScope { ground_only, full };

struct LanczosOptions {
  int max_iterations = 400;
  Real tolerance = 1e-11;       // residual ||Hv - Ev||
  std::uint64_t seed = 0x5eedULL;
};

/// Full dense spectrum of a real-symmetric sector block; guarded to L <= 16.
SectorEigensystem dense_sector_eigensystem(const PauliOperator& op, const SectorBasis& basis);

/// Matrix-free Lanczos with full reorthogonalization; guarded to L <= 24.
/// Throws on convergence failure, reporting the last residual.
EigenPair lanczos_ground_state(const PauliOperator& op, const SectorBasis& basis,
                               const LanczosOptions& opts = {});

/// ground_only -> one pair (Lanczos); full -> every pair (dense).
std::vector<EigenPair> eigensystem_effective(const PauliOperator& op, const SectorBasis& basis,
                                             SpectrumScope scope);

/// Caches the tau-independent pieces of T_sec(tau).
class SectorFloquetBuilder {
 public:
  SectorFloquetBuilder(const ModelParams& p, const SectorBasis& basis);

  const ModelParams& params() const { return params_; }
  Index dim() const { return h1_diag_.size(); }
  const VectorXd& h1_diagonal() const { return h1_diag_; }
  const SectorEigensystem& h2_eigen() const { return h2_; }
  MatrixXcd unitary(Real tau) const;

 private:
  ModelParams params_;
  VectorXd h1_diag_;
  SectorEigensystem h2_;
};

/// Same caching for the deformed cycle with A+- = H0 +- eps K.
class SectorDeformedBuilder {
 public:
  SectorDeformedBuilder(const ModelParams& p, Real epsilon, const SectorBasis& basis);

  Real epsilon() const { return epsilon_; }
  Index dim() const { return plus_.energies.size(); }
  MatrixXcd unitary(Real tau) const;

 private:
  Real epsilon_;
  SectorEigensystem plus_;   // H0 + eps K
  SectorEigensystem minus_;  // H0 - eps K
};

struct FloquetEigensystem {
  Real tau = 0;
  VectorXd quasienergies;  // ascending in [-pi, pi)
  MatrixXcd vectors;       // unit eigencolumns of the sector unitary
  Real min_circle_gap = 0;
  bool degenerate = false;       // min gap below 1e-12
  Real unitarity_error = 0;      // max |V^H V - I|
  Real reflection_defect = 0;    // recorded distance of {theta} from {-theta}
};

/// Schur-based Floquet eigensystem: eigenvalues from the triangular factor,
/// eigenvectors by safeguarded back-substitution, then re-orthonormalization
/// within near-degenerate quasienergy clusters.
FloquetEigensystem floquet_eigensystem(const MatrixXcd& unitary, Real tau);

/// Diagonal expectation values <v_a| op |v_a> per eigencolumn.
VectorXd column_expectations(const MatrixXcd& vectors, const MatrixXd& op_sector);
/// Overlaps c_a = <v_a | reference>.
VectorXcd column_overlaps(const MatrixXcd& vectors, const VectorXd& reference);

struct DeltaUMatrix {
  VectorXd energies;  // effective-Hamiltonian eigenvalues E_j
  MatrixXcd matrix;   // <E_j'| U_2k(tau)^dagger T(tau) |E_j>
};

/// Defect unitary of the order-2k effective Hamiltonian, expressed in that
/// Hamiltonian's eigenbasis; guarded to L <= 14.
DeltaUMatrix delta_u_matrix(const ModelParams& p, int order_k, const SectorBasis& basis);

}  // namespace floq
