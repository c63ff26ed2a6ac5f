#include "floq/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace floq {

namespace {

Real fold_to_pi(Real theta) {
  Real t = std::remainder(theta, 2 * kPi);
  if (t >= kPi) t -= 2 * kPi;  // remainder returns (-pi, pi]; fold the edge
  return t;
}

}  // namespace

SectorEigensystem dense_sector_eigensystem(const PauliOperator& op, const SectorBasis& basis) {
  if (basis.sites() > 16)
    throw std::invalid_argument("dense_sector_eigensystem: guarded to sites <= 16");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(basis.project_real(op));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_sector_eigensystem: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenPair lanczos_ground_state(const PauliOperator& op, const SectorBasis& basis,
                               const LanczosOptions& opts) {
  if (basis.sites() > 24)
    throw std::invalid_argument("lanczos_ground_state: guarded to sites <= 24");
  const Index d = basis.dim();
  const auto terms = basis.compile_real(op);
  const int m_cap = static_cast<int>(std::min<Index>(opts.max_iterations, d));

  // deterministic start vector
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<Real> gauss(0, 1);
  VectorXd v(d);
  for (Index i = 0; i < d; ++i) v[i] = gauss(rng);
  v.normalize();

  std::vector<VectorXd> lanczos_basis;
  lanczos_basis.reserve(static_cast<std::size_t>(m_cap));
  std::vector<Real> alpha, beta;  // tridiagonal entries
  VectorXd w(d);
  Real residual = 0;

  for (int m = 0; m < m_cap; ++m) {
    lanczos_basis.push_back(v);
    basis.apply(terms, v, w);
    const Real a = v.dot(w);
    alpha.push_back(a);

    // full reorthogonalization keeps the basis numerically orthonormal
    w -= a * v;
    if (m > 0) w -= beta.back() * lanczos_basis[static_cast<std::size_t>(m - 1)];
    for (const VectorXd& q : lanczos_basis) w -= q.dot(w) * q;
    for (const VectorXd& q : lanczos_basis) w -= q.dot(w) * q;

    const int k = m + 1;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    MatrixXd tri = MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k)
        tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    es.compute(tri);
    const Real b_next = w.norm();
    // residual of the lowest Ritz pair: beta_{m+1} * |last component|
    residual = b_next * std::abs(es.eigenvectors()(k - 1, 0));
    const Real scale = std::max(Real(1), std::abs(es.eigenvalues()[0]));
    if (residual < opts.tolerance * scale || b_next < 1e-14 || k == d) {
      VectorXd ground = VectorXd::Zero(d);
      for (int i = 0; i < k; ++i)
        ground += es.eigenvectors()(i, 0) * lanczos_basis[static_cast<std::size_t>(i)];
      ground.normalize();
      // sign convention: largest-magnitude component positive
      Index imax = 0;
      ground.cwiseAbs().maxCoeff(&imax);
      if (ground[imax] < 0) ground = -ground;
      return {0, es.eigenvalues()[0], std::move(ground)};
    }
    beta.push_back(b_next);
    v = w / b_next;
  }
  throw std::runtime_error("lanczos_ground_state: no convergence after " +
                           std::to_string(m_cap) + " iterations, residual " +
                           std::to_string(residual));
}

std::vector<EigenPair> eigensystem_effective(const PauliOperator& op, const SectorBasis& basis,
                                             SpectrumScope scope) {
  if (scope == SpectrumScope::ground_only) return {lanczos_ground_state(op, basis)};
  const SectorEigensystem sys = dense_sector_eigensystem(op, basis);
  std::vector<EigenPair> pairs;
  pairs.reserve(static_cast<std::size_t>(sys.energies.size()));
  for (Index j = 0; j < sys.energies.size(); ++j)
    pairs.push_back({j, sys.energies[j], sys.vectors.col(j)});
  return pairs;
}

SectorFloquetBuilder::SectorFloquetBuilder(const ModelParams& p, const SectorBasis& basis)
    : params_(p) {
  h1_diag_ = basis.diagonal(build_h1(p));
  h2_ = dense_sector_eigensystem(build_h2(p), basis);
}

MatrixXcd SectorFloquetBuilder::unitary(Real tau) const {
  const Index d = dim();
  // V exp(-i lambda tau) V^T, then the diagonal half steps on both sides
  MatrixXcd kick(d, d);
  {
    MatrixXd cos_part(d, d), sin_part(d, d);
    VectorXd c(d), s(d);
    for (Index i = 0; i < d; ++i) {
      c[i] = std::cos(h2_.energies[i] * tau);
      s[i] = std::sin(h2_.energies[i] * tau);
    }
    cos_part.noalias() = h2_.vectors * c.asDiagonal() * h2_.vectors.transpose();
    sin_part.noalias() = h2_.vectors * s.asDiagonal() * h2_.vectors.transpose();
    kick.real() = cos_part;
    kick.imag() = -sin_part;
  }
  VectorXcd half(d);
  for (Index i = 0; i < d; ++i) half[i] = std::polar(Real(1), -h1_diag_[i] * tau / 2);
  return half.asDiagonal() * kick * half.asDiagonal();
}

SectorDeformedBuilder::SectorDeformedBuilder(const ModelParams& p, Real epsilon,
                                             const SectorBasis& basis)
    : epsilon_(epsilon) {
  PauliOperator plus = build_h0(p);
  PauliOperator minus = plus;
  PauliOperator k_op = build_drive(p);
  k_op *= Complex{epsilon, 0};
  plus += k_op;
  minus -= k_op;
  plus_ = dense_sector_eigensystem(plus, basis);
  minus_ = dense_sector_eigensystem(minus, basis);
}

MatrixXcd SectorDeformedBuilder::unitary(Real tau) const {
  const Index d = dim();
  const auto exponential = [d](const SectorEigensystem& sys, Real t) {
    VectorXcd phases(d);
    for (Index i = 0; i < d; ++i) phases[i] = std::polar(Real(1), -sys.energies[i] * t);
    MatrixXcd out(d, d);
    MatrixXd re(d, d), im(d, d);
    re.noalias() = sys.vectors * phases.real().asDiagonal() * sys.vectors.transpose();
    im.noalias() = sys.vectors * phases.imag().asDiagonal() * sys.vectors.transpose();
    out.real() = re;
    out.imag() = im;
    return out;
  };
  const MatrixXcd half = exponential(plus_, tau / 2);
  return half * exponential(minus_, tau) * half;
}

FloquetEigensystem floquet_eigensystem(const MatrixXcd& unitary, Real tau) {
  const Index d = unitary.rows();
  if (d != unitary.cols()) throw std::invalid_argument("floquet_eigensystem: square input");

  Eigen::ComplexSchur<MatrixXcd> schur(unitary, /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("floquet_eigensystem: Schur decomposition failed");
  const MatrixXcd& t = schur.matrixT();
  const MatrixXcd& q = schur.matrixU();

  // Back-substitute (T - lambda_k) y = 0 with y_k = 1; tiny denominators are
  // clamped (they occur only inside degenerate clusters, reorthonormalized
  // below).
  MatrixXcd vectors(d, d);
  const Real clamp = 1e-14 * std::max<Real>(1, t.cwiseAbs().maxCoeff());
  for (Index k = 0; k < d; ++k) {
    VectorXcd y = VectorXcd::Zero(d);
    y[k] = Complex{1, 0};
    const Complex lambda = t(k, k);
    for (Index i = k - 1; i >= 0; --i) {
      Complex rhs{0, 0};
      for (Index j = i + 1; j <= k; ++j) rhs += t(i, j) * y[j];
      Complex denom = lambda - t(i, i);
      if (std::abs(denom) < clamp) denom = Complex{clamp, 0};
      y[i] = rhs / denom;
    }
    vectors.col(k) = q * y;
    vectors.col(k).normalize();
  }

  FloquetEigensystem out;
  out.tau = tau;
  out.quasienergies.resize(d);
  for (Index k = 0; k < d; ++k) out.quasienergies[k] = fold_to_pi(-std::arg(t(k, k)));

  // sort by quasienergy
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return out.quasienergies[a] < out.quasienergies[b];
  });
  VectorXd sorted_theta(d);
  MatrixXcd sorted_vectors(d, d);
  for (Index k = 0; k < d; ++k) {
    sorted_theta[k] = out.quasienergies[order[static_cast<std::size_t>(k)]];
    sorted_vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  out.quasienergies.swap(sorted_theta);
  out.vectors.swap(sorted_vectors);

  // re-orthonormalize within clusters of nearby quasienergies (circle metric)
  const Real cluster_width = 1e-8;
  Index start = 0;
  while (start < d) {
    Index stop = start + 1;
    while (stop < d && out.quasienergies[stop] - out.quasienergies[stop - 1] < cluster_width)
      ++stop;
    for (Index a = start; a < stop; ++a) {
      for (Index b = start; b < a; ++b)
        out.vectors.col(a) -= out.vectors.col(b).dot(out.vectors.col(a)) * out.vectors.col(b);
      out.vectors.col(a).normalize();
    }
    start = stop;
  }

  // gap statistics on the circle
  Real min_gap = 2 * kPi;
  if (d > 1) {
    for (Index k = 1; k < d; ++k)
      min_gap = std::min(min_gap, out.quasienergies[k] - out.quasienergies[k - 1]);
    min_gap = std::min(min_gap,
                       2 * kPi - (out.quasienergies[d - 1] - out.quasienergies[0]));
  }
  out.min_circle_gap = min_gap;
  out.degenerate = min_gap < 1e-12;

  out.unitarity_error =
      (out.vectors.adjoint() * out.vectors - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();

  // {theta} -> {-theta} symmetry holds only in special frames; record the
  // mismatch without asserting it.
  Real defect = 0;
  for (Index k = 0; k < d; ++k) {
    const Real mirrored = -out.quasienergies[d - 1 - k];
    defect = std::max(defect,
                      std::abs(std::remainder(out.quasienergies[k] - mirrored, 2 * kPi)));
  }
  out.reflection_defect = defect;
  return out;
}

VectorXd column_expectations(const MatrixXcd& vectors, const MatrixXd& op_sector) {
  const Index d = vectors.cols();
  VectorXd out(d);
  const MatrixXcd transformed = op_sector.cast<Complex>() * vectors;
  for (Index k = 0; k < d; ++k) {
    const Complex v = vectors.col(k).dot(transformed.col(k));
    out[k] = v.real();
  }
  return out;
}

VectorXcd column_overlaps(const MatrixXcd& vectors, const VectorXd& reference) {
  return vectors.adjoint() * reference.cast<Complex>();
}

DeltaUMatrix delta_u_matrix(const ModelParams& p, int order_k, const SectorBasis& basis) {
  if (basis.sites() > 14) throw std::invalid_argument("delta_u_matrix: guarded to sites <= 14");
  const SectorEigensystem eff =
      dense_sector_eigensystem(magnus_truncation(p, order_k), basis);
  const SectorFloquetBuilder builder(p, basis);
  const MatrixXcd cycle = builder.unitary(p.tau);
  // <E_j'| U_2k^dagger T |E_j> = exp(+i E_j' tau) (W^T T W)_{j'j}
  MatrixXcd m = eff.vectors.transpose().cast<Complex>() * cycle * eff.vectors.cast<Complex>();
  for (Index j = 0; j < m.rows(); ++j)
    m.row(j) *= std::polar(Real(1), eff.energies[j] * p.tau);
  return {eff.energies, std::move(m)};
}

}  // namespace floq
