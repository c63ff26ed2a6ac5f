#include "floq/fidelity.hpp"

#include <cmath>
#include <stdexcept>

namespace floq {

namespace {

// Gaussian weights below e^-36 are invisible at double precision next to the
// n = 0 term, so every sum over n stops at 6 sigma.
long weight_cutoff(Real sigma) { return static_cast<long>(std::ceil(6.0 * sigma)); }

}  // namespace

AveragedFidelity time_averaged_fidelity(const FidelityTrace& trace, Real sigma) {
  if (sigma <= 0) throw std::invalid_argument("time_averaged_fidelity: sigma must be positive");
  if (trace.values.empty()) throw std::invalid_argument("time_averaged_fidelity: empty trace");
  const long n_max = static_cast<long>(trace.values.size()) - 1;
  if (static_cast<Real>(n_max) < 5.0 * sigma)
    throw std::invalid_argument("time_averaged_fidelity: trace reaches n = " +
                                std::to_string(n_max) + " but sigma = " + std::to_string(sigma) +
                                " needs n_max >= 5 sigma");

  const long n_cut = std::min(n_max, weight_cutoff(sigma));
  // Identical descending-n order for both sums: small weights first, and a
  // constant trace yields numerator == normalization bit for bit.
  Real numerator = 0;
  Real norm = 0;
  for (long n = n_cut; n >= 0; --n) {
    const Real u = static_cast<Real>(n) / sigma;
    const Real w = std::exp(-u * u);
    norm += w;
    numerator += w * trace.values[static_cast<std::size_t>(n)];
  }

  AveragedFidelity out;
  out.sigma = sigma;
  out.normalization = norm;
  // rounding can push the quotient of a flat trace a few ulp above 1
  out.fbar = std::min(numerator / norm, 1.0);
  out.rate = rate_from_fidelity(out.fbar, trace.sites);
  return out;
}

Real rate_from_fidelity(Real fbar, int sites) {
  if (fbar <= 0) throw std::domain_error("rate_from_fidelity: fidelity must be positive");
  if (sites <= 0) throw std::domain_error("rate_from_fidelity: sites must be positive");
  return -std::log(fbar) / static_cast<Real>(sites);
}

namespace {

// Compensated accumulator.  Both the normalization and every kernel
// evaluation run it over n ascending, so at x = 2 pi l (where every cosine
// factor is exactly one) the numerator reproduces the normalization bit for
// bit and the quotient is exactly 1.
struct KahanSum {
  Real total = 0;
  Real carry = 0;
  void add(Real term) {
    const Real y = term - carry;
    const Real t = total + y;
    carry = (t - total) - y;
    total = t;
  }
};

}  // namespace

GaussianWindow::GaussianWindow(Real sigma) : sigma_(sigma) {
  if (sigma <= 0) throw std::invalid_argument("GaussianWindow: sigma must be positive");
  const long n_cut = weight_cutoff(sigma);
  weights_.resize(static_cast<std::size_t>(n_cut));
  KahanSum tail;
  for (long n = 1; n <= n_cut; ++n) {
    const Real u = static_cast<Real>(n) / sigma;
    const Real w = std::exp(-u * u);
    weights_[static_cast<std::size_t>(n - 1)] = w;
    tail.add(w);
  }
  normalization_ = 1.0 + tail.total;
}

Real GaussianWindow::operator()(Real x) const {
  const Real y = std::remainder(x, 2 * kPi);
  const Real step_c = std::cos(y);
  const Real step_s = std::sin(y);
  // rotation recurrence for cos(n y), re-seeded from libm every block so the
  // accumulated phase drift stays at the refresh length times epsilon
  constexpr long kRefresh = 4096;
  Real c = step_c;
  Real s = step_s;
  KahanSum acc;
  const long count = static_cast<long>(weights_.size());
  for (long n = 1; n <= count; ++n) {
    if (n > 1 && (n - 1) % kRefresh == 0) {
      c = std::cos(static_cast<Real>(n) * y);
      s = std::sin(static_cast<Real>(n) * y);
    }
    acc.add(weights_[static_cast<std::size_t>(n - 1)] * c);
    const Real next_c = c * step_c - s * step_s;
    const Real next_s = s * step_c + c * step_s;
    c = next_c;
    s = next_s;
  }
  return (1.0 + acc.total) / normalization_;
}

Real d_sigma_kernel(Real x, Real sigma) { return GaussianWindow(sigma)(x); }

namespace {

VectorXd overlap_probabilities(const FloquetEigensystem& floquet, const VectorXcd& reference) {
  return (floquet.vectors.adjoint() * reference).cwiseAbs2();
}

Real infinite_time_from_probabilities(const FloquetEigensystem& floquet, const VectorXd& p) {
  if (floquet.degenerate)
    throw std::runtime_error(
        "infinite_time_fidelity: degenerate quasienergy spectrum, the diagonal-"
        "ensemble expression does not apply");
  return p.squaredNorm();
}

Real spectral_average_from_probabilities(const FloquetEigensystem& floquet, const VectorXd& p,
                                         const GaussianWindow& window) {
  const Index d = p.size();
  Real fbar = p.squaredNorm();
  for (Index a = 0; a < d; ++a) {
    for (Index b = a + 1; b < d; ++b) {
      const Real joint = 2.0 * p[a] * p[b];
      // 0 < D <= 1, so skipped pairs cost less than d^2/2 * 1e-18 in total
      if (joint < 1e-18) continue;
      fbar += joint * window(floquet.quasienergies[a] - floquet.quasienergies[b]);
    }
  }
  return fbar;
}

}  // namespace

Real infinite_time_fidelity(const FloquetEigensystem& floquet, const VectorXd& reference) {
  const VectorXcd c = column_overlaps(floquet.vectors, reference);
  return infinite_time_from_probabilities(floquet, c.cwiseAbs2());
}

Real infinite_time_fidelity(const FloquetEigensystem& floquet, const VectorXcd& reference) {
  return infinite_time_from_probabilities(floquet, overlap_probabilities(floquet, reference));
}

Real spectral_average_fidelity(const FloquetEigensystem& floquet, const VectorXd& reference,
                               const GaussianWindow& window) {
  const VectorXcd c = column_overlaps(floquet.vectors, reference);
  return spectral_average_from_probabilities(floquet, c.cwiseAbs2(), window);
}

Real spectral_average_fidelity(const FloquetEigensystem& floquet, const VectorXcd& reference,
                               const GaussianWindow& window) {
  return spectral_average_from_probabilities(floquet, overlap_probabilities(floquet, reference),
                                             window);
}

Real spectral_average_fidelity(const FloquetEigensystem& floquet, const VectorXd& reference,
                               Real sigma) {
  const GaussianWindow window(sigma);
  return spectral_average_fidelity(floquet, reference, window);
}

}  // namespace floq
