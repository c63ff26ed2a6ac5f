#include "floq/spectral.hpp"

#include <doctest.h>

#include "floq/state.hpp"
#include "oracle_helpers.hpp"

#include <set>

using namespace floq;

namespace {

MatrixXcd embedding(const SectorBasis& basis) {
  const Index d = basis.dim();
  MatrixXcd b(Index(1) << basis.sites(), d);
  for (Index i = 0; i < d; ++i) {
    VectorXcd e = VectorXcd::Zero(d);
    e[i] = Complex{1, 0};
    b.col(i) = basis.lift(e);
  }
  return b;
}

}  // namespace

TEST_CASE("dense sector spectrum embeds into the full spectrum") {
  const int sites = 8;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 1.0, 1.0, 1.0, 0.5};
  const PauliOperator h = magnus_truncation(p, 0);
  const SectorEigensystem sys = dense_sector_eigensystem(h, basis);
  REQUIRE(sys.energies.size() == basis.dim());

  Eigen::SelfAdjointEigenSolver<MatrixXcd> full(oracle::dense_operator(h));
  const VectorXd all = full.eigenvalues();
  for (Index j = 0; j < sys.energies.size(); ++j) {
    Real best = 1e9;
    for (Index i = 0; i < all.size(); ++i) best = std::min(best, std::abs(all[i] - sys.energies[j]));
    CHECK(best < 1e-10);
  }

  // spectral extremes live in this sector, so the sector bounds the 2-norm
  CHECK(std::abs(all.cwiseAbs().maxCoeff() - sys.energies.cwiseAbs().maxCoeff()) < 1e-10);
  CHECK(sys.energies.cwiseAbs().maxCoeff() <= spectral_norm_bound(h) + 1e-12);

  // orthonormal eigenbasis with small residuals
  const MatrixXd block = basis.project_real(h);
  CHECK((sys.vectors.transpose() * sys.vectors - MatrixXd::Identity(basis.dim(), basis.dim()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  for (Index j : {Index{0}, basis.dim() / 2, basis.dim() - 1})
    CHECK((block * sys.vectors.col(j) - sys.energies[j] * sys.vectors.col(j)).norm() < 1e-9);
}

TEST_CASE("Lanczos ground state matches dense and meets the residual bound") {
  for (int sites : {10, 12}) {
    CAPTURE(sites);
    const SectorBasis basis = SectorBasis::build(sites);
    const ModelParams p{sites, 1.0, 1.0, 1.0, 0.5};
    const PauliOperator h = magnus_truncation(p, 1);
    const EigenPair ground = lanczos_ground_state(h, basis);
    const SectorEigensystem sys = dense_sector_eigensystem(h, basis);
    CHECK(ground.energy == doctest::Approx(sys.energies[0]).epsilon(1e-11));
    // residual against the matrix-free application
    VectorXd w;
    basis.apply(basis.compile_real(h), ground.vector, w);
    CHECK((w - ground.energy * ground.vector).norm() < 1e-9);
    // same ray as the dense ground state
    CHECK(std::abs(std::abs(ground.vector.dot(sys.vectors.col(0))) - 1.0) < 1e-9);

    const auto pairs = eigensystem_effective(h, basis, SpectrumScope::ground_only);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].energy == doctest::Approx(ground.energy));
  }
}

TEST_CASE("sector cycle unitary matches the embedded full-space cycle") {
  const int sites = 8;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 1.0, 1.0, 1.0, 0.9};
  const SectorFloquetBuilder builder(p, basis);
  const MatrixXcd t_sec = builder.unitary(p.tau);

  const FloquetStepPlan plan(p);
  const MatrixXcd b = embedding(basis);
  MatrixXcd t_full(b.rows(), b.cols());
  for (Index i = 0; i < b.cols(); ++i) {
    StateVector psi{sites, b.col(i)};
    plan.apply(psi);
    t_full.col(i) = psi.amps;
  }
  CHECK((b.adjoint() * t_full - t_sec).cwiseAbs().maxCoeff() < 1e-12);

  // unitarity and tau-sweep reuse
  const Index d = basis.dim();
  CHECK((t_sec.adjoint() * t_sec - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
  const MatrixXcd t2 = builder.unitary(2 * p.tau);
  CHECK((t2.adjoint() * t2 - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Floquet eigensystem solves the eigenproblem unitarily") {
  const int sites = 10;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 1.0, 1.0, 1.0, 1.3};
  const SectorFloquetBuilder builder(p, basis);
  const MatrixXcd u = builder.unitary(p.tau);
  const FloquetEigensystem sys = floquet_eigensystem(u, p.tau);
  const Index d = basis.dim();

  REQUIRE(sys.quasienergies.size() == d);
  CHECK(sys.unitarity_error < 1e-9);
  for (Index k = 0; k < d; ++k) {
    CHECK(sys.quasienergies[k] >= -kPi);
    CHECK(sys.quasienergies[k] < kPi);
    if (k > 0) CHECK(sys.quasienergies[k] >= sys.quasienergies[k - 1]);
    const Complex lambda = std::polar(Real(1), -sys.quasienergies[k]);
    CHECK((u * sys.vectors.col(k) - lambda * sys.vectors.col(k)).norm() < 1e-9);
  }
  CHECK(sys.min_circle_gap > 0);

  // completeness: sum_a |<theta_a|E_j>|^2 = 1 for any sector state
  const SectorEigensystem eff = dense_sector_eigensystem(magnus_truncation(p, 0), basis);
  for (Index j : {Index{0}, d / 3, d - 1}) {
    const VectorXcd c = column_overlaps(sys.vectors, eff.vectors.col(j));
    CHECK(c.squaredNorm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("quasienergies reduce to E tau below the folding threshold") {
  const int sites = 8;
  const SectorBasis basis = SectorBasis::build(sites);
  ModelParams p{sites, 1.0, 1.0, 1.0, 0.02};
  const SectorFloquetBuilder builder(p, basis);
  const SectorEigensystem eff = dense_sector_eigensystem(magnus_truncation(p, 0), basis);
  const FloquetEigensystem sys = floquet_eigensystem(builder.unitary(p.tau), p.tau);
  VectorXd expected = eff.energies * p.tau;
  std::sort(expected.begin(), expected.end());
  // at tau = 0.02 the Trotter defect is O(tau^3) ~ 1e-5; scale accordingly
  CHECK((sys.quasienergies - expected).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("column expectation helper") {
  const int sites = 8;
  const SectorBasis basis = SectorBasis::build(sites);
  const MatrixXd mz = basis.project_real(build_mz(sites));
  const MatrixXcd v = embedding(basis).adjoint() * embedding(basis);  // identity columns
  const VectorXd diag = column_expectations(MatrixXcd::Identity(basis.dim(), basis.dim()), mz);
  for (Index i = 0; i < basis.dim(); ++i) CHECK(diag[i] == doctest::Approx(mz(i, i)));
  (void)v;
}

TEST_CASE("deformed sector builder coincides with the circuit at eps = 1") {
  const int sites = 10;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 1.0, 1.0, 1.0, 1.1};
  const SectorFloquetBuilder circuit(p, basis);
  const SectorDeformedBuilder deformed(p, 1.0, basis);
  CHECK((circuit.unitary(p.tau) - deformed.unitary(p.tau)).cwiseAbs().maxCoeff() < 1e-10);

  const SectorDeformedBuilder off(p, 0.3, basis);
  const MatrixXcd u = off.unitary(p.tau);
  CHECK((u.adjoint() * u - MatrixXcd::Identity(basis.dim(), basis.dim())).cwiseAbs().maxCoeff() <
        1e-11);
}

TEST_CASE("defect unitary") {
  const int sites = 12;
  const SectorBasis basis = SectorBasis::build(sites);

  SUBCASE("unitary and near identity at small tau") {
    ModelParams p{sites, 1.0, 1.0, 1.0, 0.05};
    const DeltaUMatrix du1 = delta_u_matrix(p, 1, basis);
    const Index d = du1.matrix.rows();
    CHECK((du1.matrix.adjoint() * du1.matrix - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() <
          1e-10);
    const Real defect1 = (du1.matrix - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
    const DeltaUMatrix du0 = delta_u_matrix(p, 0, basis);
    const Real defect0 = (du0.matrix - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
    CHECK(defect1 < 1e-6);
    CHECK(defect0 > 10 * defect1);  // lower order leaves a larger defect
  }

  SUBCASE("ground-state coupling weight scales as tau^(2(2k+3))") {
    // single-cycle matrix elements sit at an O(1) energy transfer fixed by the
    // residual operator; only their magnitude tracks the truncation order
    for (int order : {0, 1}) {
      CAPTURE(order);
      Real weight[2];
      Real gap[2];
      const Real taus[2] = {0.3, 0.5};
      for (int t = 0; t < 2; ++t) {
        ModelParams p{sites, 1.0, 1.0, 1.0, taus[t]};
        const DeltaUMatrix du = delta_u_matrix(p, order, basis);
        const Index d = du.matrix.rows();
        Real best = 0;
        Index best_j = 1;
        for (Index j = 1; j < d; ++j) {
          const Real w = std::norm(du.matrix(j, 0));
          if (w > best) {
            best = w;
            best_j = j;
          }
        }
        weight[t] = best;
        gap[t] = du.energies[best_j] - du.energies[0];
      }
      const Real slope = std::log(weight[1] / weight[0]) / std::log(taus[1] / taus[0]);
      CHECK(slope == doctest::Approx(2.0 * (2 * order + 3)).epsilon(0.09));
      // the target state is a property of the operator, not of tau
      CHECK(std::abs(gap[1] - gap[0]) < 0.1);
    }
  }
}
