#pragma once

// Pauli-string algebra for a periodic spin-1/2 chain.
//
// A PauliString encodes the Hermitian tensor product of single-site letters
// {I, X, Y, Z} as two bit masks: bit j of `x` (`z`) set means the letter at
// site j carries an X (Z) factor; both bits set means Y.  With the bare
// product B(x,z) = prod_j X_j^{x_j} Z_j^{z_j} the stored operator is
//
//   S(x,z) = i^{popcount(x & z)} B(x,z),
//
// which is Hermitian with eigenvalues +-1.  Products of strings then reduce
// to XOR of the masks plus a phase i^k that is tracked exactly, so operator
// arithmetic (sums, products, nested commutators) is bit-exact apart from
// floating-point coefficients.

#include "floq/types.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <string>

namespace floq {

struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  friend auto operator<=>(const PauliString&, const PauliString&) = default;
};

/// Exponent k in S_a * S_b = i^k S_{ab} with masks {a.x^b.x, a.z^b.z}.
int product_phase_exponent(const PauliString& a, const PauliString& b);

/// Two strings either commute or anticommute; they commute iff the symplectic
/// form popcount(a.x & b.z) + popcount(a.z & b.x) is even.
bool strings_commute(const PauliString& a, const PauliString& b);

/// Action on a computational basis state: S |b> = phase * |b ^ S.x>.
/// Bit j of b set means spin down at site j (Z_j eigenvalue -1).
Complex basis_action_phase(const PauliString& s, std::uint64_t b);

/// Per-site letters, position j (0-based) = site j; e.g. "IXYZ".
std::string to_letters(const PauliString& s, int sites);
PauliString from_letters(const std::string& letters);

/// Sparse sum of Pauli strings with complex coefficients.  Terms are kept in
/// a canonical (mask-ordered) map; accumulation merges duplicates and drops
/// coefficients below the pruning threshold.
class PauliOperator {
 public:
  static constexpr Real prune_threshold = 1e-14;

  explicit PauliOperator(int sites);

  int sites() const { return sites_; }
  const std::map<PauliString, Complex>& terms() const { return terms_; }
  Index term_count() const { return static_cast<Index>(terms_.size()); }
  bool empty() const { return terms_.empty(); }

  PauliOperator& add(const PauliString& s, Complex coeff);
  Complex coefficient(const PauliString& s) const;

  /// Letter strings are Hermitian, so Hermiticity = real coefficients.
  Real max_abs_imag() const;
  /// Sum of |coefficient|; a convenient term-magnitude norm.
  Real coefficient_norm1() const;
  /// Drops imaginary parts after checking they are below `tol`.
  PauliOperator& require_real(Real tol = 1e-12);

  PauliOperator& operator+=(const PauliOperator& other);
  PauliOperator& operator-=(const PauliOperator& other);
  PauliOperator& operator*=(Complex scale);

  friend PauliOperator operator+(PauliOperator a, const PauliOperator& b) { return a += b; }
  friend PauliOperator operator-(PauliOperator a, const PauliOperator& b) { return a -= b; }
  friend PauliOperator operator*(Complex scale, PauliOperator a) { return a *= scale; }

 private:
  int sites_;
  std::map<PauliString, Complex> terms_;
};

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b);

/// [A, B] = AB - BA; string pairs that commute are skipped (their two
/// products cancel exactly), anticommuting pairs contribute 2 AB.
PauliOperator commutator(const PauliOperator& a, const PauliOperator& b);

/// Chain parameters.  The drive alternates between
///   H1 = -sum_j [ (J/4) Z_j Z_{j+1} + (h/2) Z_j ]   (periodic, site L+1 = 1)
///   H2 = -(g/2) sum_j X_j
/// with half-period tau, i.e. one cycle is exp(-iH1 tau/2) exp(-iH2 tau)
/// exp(-iH1 tau/2).
struct ModelParams {
  int sites = 0;
  Real coupling_j = 1.0;
  Real field_h = 1.0;
  Real field_g = 1.0;
  Real tau = 0.0;
};

PauliOperator build_h1(const ModelParams& p);
PauliOperator build_h2(const ModelParams& p);
/// Mean Hamiltonian H0 = (H1 + H2)/2.
PauliOperator build_h0(const ModelParams& p);
/// Drive operator K = (H1 - H2)/2, so H1 = H0 + K and H2 = H0 - K.
PauliOperator build_drive(const ModelParams& p);
/// Magnetization density m_z = L^{-1} sum_j Z_j.
PauliOperator build_mz(int sites);
/// Tilted magnetization (1/sqrt(2)) sum_j (X_j + Z_j).
PauliOperator build_tilted_magnetization(int sites);

/// Effective Floquet Hamiltonian H_F^(2k) of the symmetric splitting,
/// exp(-iH1 tau/2) exp(-iH2 tau) exp(-iH1 tau/2) = exp(-iH_F^(2k) tau)
/// + O(tau^{2k+3}).  Orders k = 0 (H1 + H2) and k = 1 (includes the tau^2
/// double-commutator correction) are supported; odd-order corrections vanish
/// because the splitting is time-symmetric.  The k = 1 correction is obtained
/// mechanically from the degree-3 Baker-Campbell-Hausdorff composition of the
/// three exponentials, not from a hand-derived closed form.
PauliOperator magnus_truncation(const ModelParams& p, int order_k);

/// Growth ratio ||h^(2)|| tau^2 / ||h^(0)|| of successive effective-series
/// terms (coefficient 1-norms).  Reported as a diagnostic only; no claim
/// about the series' convergence radius is attached.
Real magnus_term_ratio(const ModelParams& p);

/// Triangle-inequality bound sum_t |c_t| >= ||op||_2.
Real spectral_norm_bound(const PauliOperator& op);

/// Dense matrix in the computational basis; guarded to sites <= 14.
MatrixXcd to_dense(const PauliOperator& op);

/// JSON form: list of {"string": per-site letters, "re": .., "im": ..},
/// emitted in canonical (mask-ordered) term order.
std::string to_json_text(const PauliOperator& op);
PauliOperator operator_from_json_text(const std::string& text);

}  // namespace floq
