#pragma once

// Fidelity-derived observables.
//
// A fidelity trace F(n) is compressed into the Gaussian-cutoff average
//   Fbar = N^-1 sum_{n>=0} F(n) e^{-(n/sigma)^2},   N = sum_{n>=0} e^{-(n/sigma)^2},
// and the intensive rate s = -ln(Fbar)/L.  The same average evaluated over a
// Floquet eigensystem turns into a double sum over eigenstate pairs weighted
// by the kernel D_sigma(theta_a - theta_b); the sigma -> infinity limit keeps
// only the diagonal and reduces to sum_a |c_a|^4.

#include "floq/spectral.hpp"
#include "floq/state.hpp"
#include "floq/types.hpp"

#include <vector>

namespace floq {

struct AveragedFidelity {
  Real sigma = 0;
  Real fbar = 1;
  Real normalization = 1;  // N = sum of the Gaussian weights, cut at n = 6 sigma
  Real rate = 0;           // -ln(Fbar) / L
};

/// Gaussian-cutoff time average of a fidelity trace.  The trace must extend
/// to n_max >= 5 sigma (the discarded tail then carries weight < e^-25);
/// shorter traces throw.
AveragedFidelity time_averaged_fidelity(const FidelityTrace& trace, Real sigma);

Real rate_from_fidelity(Real fbar, int sites);

/// D_sigma(x) = (1 + sum_{n>=1} e^{-(n/sigma)^2} cos(n x)) / (1 + sum_{n>=1} e^{-(n/sigma)^2}),
/// the pair kernel of the Gaussian-cutoff average: a 2pi-periodic comb with
/// D(2 pi l) = 1 and minimum ~ 1/(sigma sqrt(pi)).  Evaluated by direct
/// summation with the series cut at n = ceil(6 sigma); weights are
/// precomputed once, so reuse one window for many arguments.
class GaussianWindow {
 public:
  explicit GaussianWindow(Real sigma);

  Real sigma() const { return sigma_; }
  Index terms() const { return static_cast<Index>(weights_.size()); }
  Real normalization() const { return normalization_; }

  Real operator()(Real x) const;

 private:
  Real sigma_ = 0;
  std::vector<Real> weights_;  // w_n for n = 1..ceil(6 sigma)
  Real normalization_ = 1;
};

/// One-shot convenience wrapper; builds the window each call.
Real d_sigma_kernel(Real x, Real sigma);

/// Infinite-time average sum_a |<theta_a|ref>|^4.  Meaningful only for a
/// non-degenerate quasienergy spectrum; throws if the eigensystem carries the
/// degeneracy flag.
Real infinite_time_fidelity(const FloquetEigensystem& floquet, const VectorXd& reference);
Real infinite_time_fidelity(const FloquetEigensystem& floquet, const VectorXcd& reference);

/// Finite-sigma average evaluated in the Floquet eigenbasis:
///   sum_a p_a^2 + 2 sum_{a<b} p_a p_b D_sigma(theta_a - theta_b),
/// p_a = |<theta_a|ref>|^2.  Equals the time-domain average of the exact
/// trace up to the Gaussian tails; pairs with negligible joint weight are
/// skipped (documented bound 1e-18 per pair).
Real spectral_average_fidelity(const FloquetEigensystem& floquet, const VectorXd& reference,
                               const GaussianWindow& window);
Real spectral_average_fidelity(const FloquetEigensystem& floquet, const VectorXcd& reference,
                               const GaussianWindow& window);
Real spectral_average_fidelity(const FloquetEigensystem& floquet, const VectorXd& reference,
                               Real sigma);

}  // namespace floq
