#pragma once

// Full-Hilbert-space state vectors and the stroboscopic evolution kernels.
//
// One drive cycle is T(tau) = exp(-iH1 tau/2) exp(-iH2 tau) exp(-iH1 tau/2).
// H1 is diagonal in the computational basis, so its half steps are a phase
// table of length 2^L; exp(-iH2 tau) factorizes into L independent
// single-site rotations exp(+i(g tau/2) X_j) applied in place over
// stride-paired amplitude pairs.  Everything runs in double precision on one
// persistent state; no step history is stored.

#include "floq/pauli.hpp"
#include "floq/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace floq {

struct StateVector {
  int sites = 0;
  VectorXcd amps;
};

StateVector make_basis_state(int sites, std::uint64_t b);

/// Deterministic inner product <a|b> (fixed-chunk summation order, so the
/// result is independent of the kernel thread count).
Complex overlap(const StateVector& a, const StateVector& b);

/// <psi|op|psi> for a Hermitian operator; throws if the residual imaginary
/// part exceeds tolerance.
Real expectation(const StateVector& psi, const PauliOperator& op);

/// Cyclic shift by one site (site j -> j+1); used by covariance checks.
void apply_translation(StateVector& psi);

/// Diagonal energy of H1 = -(J/4) sum Z Z - (h/2) sum Z at basis state b.
Real h1_energy(const ModelParams& p, std::uint64_t b);

/// Fidelity series F(n) = |<psi_ini| T^n |psi_ini>|^2 for n = 0..n_max.
struct FidelityTrace {
  int sites = 0;
  Real tau = 0;
  std::string initial_state;  // provenance, e.g. "ground(k=1)"
  std::vector<Real> values;
};

class FloquetStepPlan {
 public:
  explicit FloquetStepPlan(const ModelParams& p);

  const ModelParams& params() const { return params_; }
  void apply(StateVector& psi) const;
  void apply_adjoint(StateVector& psi) const;

  /// Evolves a copy of `initial` for n_max cycles, recording the fidelity
  /// after every cycle.  Algebraically identical to repeated apply(), but the
  /// trailing and leading H1 half steps of consecutive cycles are fused into
  /// one full-step phase table.
  FidelityTrace evolve_fidelity(const StateVector& initial, long n_max) const;

 private:
  ModelParams params_;
  VectorXcd half_phase_;  // exp(-i E1(b) tau / 2)
  Real rot_cos_ = 1;      // exp(+i (g tau / 2) X) = cos I + i sin X
  Real rot_sin_ = 0;
};

/// One deformed cycle exp(-iA+ tau/2) exp(-iA- tau) exp(-iA+ tau/2) with
/// A+- = H0 +- eps K; at eps = 1 this is T(tau).  Sub-unitaries act through
/// dense eigendecompositions built once per (eps, tau); guarded to L <= 14
/// (at L = 14 the two eigenbases hold ~4 GB).
class DeformedStepPlan {
 public:
  DeformedStepPlan(const ModelParams& p, Real epsilon);

  Real epsilon() const { return epsilon_; }
  void apply(StateVector& psi) const;
  FidelityTrace evolve_fidelity(const StateVector& initial, long n_max) const;

 private:
  void apply_exponential(const MatrixXd& basis, const VectorXd& energies, Real time,
                         VectorXcd& amps) const;

  int sites_ = 0;
  Real tau_ = 0;
  Real epsilon_ = 0;
  MatrixXd plus_basis_;
  VectorXd plus_energy_;
  MatrixXd minus_basis_;
  VectorXd minus_energy_;
};

/// Binary snapshot: header {sites: u32, count: u64}, then `count` interleaved
/// little-endian float64 (re, im) pairs.
void write_snapshot(const std::string& path, const StateVector& psi);
StateVector read_snapshot(const std::string& path);

}  // namespace floq
