#include "floq/state.hpp"

#include <doctest.h>

#include "floq/sector.hpp"
#include "oracle_helpers.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>

using namespace floq;

namespace {

MatrixXcd plan_as_matrix(const FloquetStepPlan& plan) {
  const int sites = plan.params().sites;
  const Index dim = Index(1) << sites;
  MatrixXcd m(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    StateVector psi = make_basis_state(sites, static_cast<std::uint64_t>(col));
    plan.apply(psi);
    m.col(col) = psi.amps;
  }
  return m;
}

MatrixXcd deformed_as_matrix(const DeformedStepPlan& plan, int sites) {
  const Index dim = Index(1) << sites;
  MatrixXcd m(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    StateVector psi = make_basis_state(sites, static_cast<std::uint64_t>(col));
    plan.apply(psi);
    m.col(col) = psi.amps;
  }
  return m;
}

StateVector random_full_state(int sites, std::uint64_t seed) {
  return {sites, oracle::random_state(Index(1) << sites, seed)};
}

}  // namespace

TEST_CASE("cycle unitary matches the Pade-exponential oracle") {
  const ModelParams p{6, 1.0, 1.0, 1.0, 0.7};
  const FloquetStepPlan plan(p);
  const MatrixXcd cycle = oracle::propagator(build_h1(p), p.tau / 2) *
                          oracle::propagator(build_h2(p), p.tau) *
                          oracle::propagator(build_h1(p), p.tau / 2);
  CHECK((plan_as_matrix(plan) - cycle).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("adjoint step restores the state") {
  const ModelParams p{10, 1.0, 1.0, 1.0, 1.1};
  const FloquetStepPlan plan(p);
  StateVector psi = random_full_state(10, 42);
  const VectorXcd before = psi.amps;
  for (int n = 0; n < 25; ++n) plan.apply(psi);
  for (int n = 0; n < 25; ++n) plan.apply_adjoint(psi);
  CHECK((psi.amps - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("norm drift stays bounded over many cycles") {
  const ModelParams p{12, 1.0, 1.0, 1.0, 0.9};
  const FloquetStepPlan plan(p);
  StateVector psi = random_full_state(12, 7);
  for (int n = 0; n < 10000; ++n) plan.apply(psi);
  CHECK(std::abs(psi.amps.norm() - 1.0) < 1e-8);
}

TEST_CASE("fused fidelity loop equals repeated application") {
  const ModelParams p{8, 1.0, 1.0, 1.0, 0.8};
  const FloquetStepPlan plan(p);
  const StateVector initial = random_full_state(8, 17);
  const long n_max = 200;
  const FidelityTrace trace = plan.evolve_fidelity(initial, n_max);
  REQUIRE(trace.values.size() == static_cast<std::size_t>(n_max) + 1);
  CHECK(trace.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  StateVector psi = initial;
  for (long n = 1; n <= n_max; ++n) {
    plan.apply(psi);
    const Real f = std::norm(overlap(initial, psi));
    CHECK(std::abs(trace.values[static_cast<std::size_t>(n)] - f) < 1e-12);
  }
}

TEST_CASE("evolution commutes with translation") {
  const ModelParams p{8, 1.0, 1.0, 1.0, 0.6};
  const FloquetStepPlan plan(p);
  StateVector a = random_full_state(8, 23);
  StateVector b = a;
  apply_translation(a);
  for (int n = 0; n < 10; ++n) plan.apply(a);  // translate, then evolve
  for (int n = 0; n < 10; ++n) plan.apply(b);
  apply_translation(b);  // evolve, then translate
  CHECK((a.amps - b.amps).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sector-projected evolution equals full evolution then projection") {
  const int sites = 10;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 1.0, 1.0, 1.0, 0.9};
  const FloquetStepPlan plan(p);
  const VectorXcd v = oracle::random_state(basis.dim(), 31);
  StateVector psi{sites, basis.lift(v)};
  for (int n = 0; n < 20; ++n) plan.apply(psi);
  const VectorXcd projected = basis.project_state(psi.amps);
  // the lifted state never leaves the sector
  CHECK(std::abs(projected.norm() - 1.0) < 1e-11);
  CHECK((basis.lift(projected) - psi.amps).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("deformed plan") {
  SUBCASE("eps = 1 coincides with the circuit step") {
    const ModelParams p{8, 1.0, 1.0, 1.0, 0.9};
    const FloquetStepPlan circuit(p);
    const DeformedStepPlan deformed(p, 1.0);
    StateVector a = random_full_state(8, 3);
    StateVector b = a;
    circuit.apply(a);
    deformed.apply(b);
    CHECK((a.amps - b.amps).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("eps = 0 collapses to exp(-2 i H0 tau)") {
    const ModelParams p{6, 1.0, 1.0, 1.0, 0.8};
    const DeformedStepPlan plan(p, 0.0);
    const MatrixXcd expected = oracle::propagator(build_h0(p), 2 * p.tau);
    CHECK((deformed_as_matrix(plan, 6) - expected).cwiseAbs().maxCoeff() < 1e-11);
  }

  SUBCASE("unitarity and unit-circle spectrum at eps = 0.3") {
    const ModelParams p{6, 1.0, 1.0, 1.0, 1.1};
    const DeformedStepPlan plan(p, 0.3);
    const MatrixXcd u = deformed_as_matrix(plan, 6);
    CHECK((u.adjoint() * u - MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <
          1e-11);
    Eigen::ComplexEigenSolver<MatrixXcd> es(u);
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      CHECK(std::abs(std::abs(es.eigenvalues()[i]) - 1.0) < 1e-10);
    // independent product of Pade exponentials
    PauliOperator plus = build_h0(p);
    PauliOperator minus = build_h0(p);
    PauliOperator k_op = build_drive(p);
    k_op *= Complex{0.3, 0};
    plus += k_op;
    minus -= k_op;
    const MatrixXcd reference = oracle::propagator(plus, p.tau / 2) *
                                oracle::propagator(minus, p.tau) *
                                oracle::propagator(plus, p.tau / 2);
    CHECK((u - reference).cwiseAbs().maxCoeff() < 1e-11);
  }

  SUBCASE("H0 eigenstates are stationary at eps = 0") {
    const ModelParams p{6, 1.0, 1.0, 1.0, 0.7};
    const MatrixXcd h0 = oracle::dense_operator(build_h0(p));
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h0);
    const DeformedStepPlan plan(p, 0.0);
    StateVector psi{6, es.eigenvectors().col(2)};
    const FidelityTrace trace = plan.evolve_fidelity(psi, 50);
    for (const Real f : trace.values) CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("size guard") {
    ModelParams p{15, 1.0, 1.0, 1.0, 0.5};
    CHECK_THROWS_AS(DeformedStepPlan(p, 0.5), std::invalid_argument);
  }
}

TEST_CASE("expectation values") {
  const int sites = 8;
  StateVector up = make_basis_state(sites, 0);
  CHECK(expectation(up, build_mz(sites)) == doctest::Approx(1.0));
  CHECK(expectation(up, build_tilted_magnetization(sites)) ==
        doctest::Approx(sites / std::sqrt(2.0)));

  const ModelParams p{sites, 1.0, 1.0, 1.0, 0.5};
  const StateVector psi = random_full_state(sites, 57);
  const PauliOperator h = magnus_truncation(p, 1);
  const MatrixXcd dense = oracle::dense_operator(h);
  const Complex expected = (psi.amps.adjoint() * dense * psi.amps).value();
  CHECK(expectation(psi, h) == doctest::Approx(expected.real()).epsilon(1e-10));
}

TEST_CASE("diagonal energies match the dense Hamiltonian") {
  const ModelParams p{7, 1.3, 0.7, 1.0, 0.0};
  const MatrixXcd h1 = oracle::dense_operator(build_h1(p));
  for (std::uint64_t b = 0; b < (1u << 7); ++b)
    CHECK(h1_energy(p, b) ==
          doctest::Approx(h1(static_cast<Index>(b), static_cast<Index>(b)).real())
              .epsilon(1e-12));
}

TEST_CASE("snapshot round trip and header layout") {
  const std::string path = "snapshot_test.bin";
  const StateVector psi = random_full_state(6, 71);
  write_snapshot(path, psi);
  const StateVector back = read_snapshot(path);
  CHECK(back.sites == psi.sites);
  CHECK((back.amps - psi.amps).cwiseAbs().maxCoeff() == 0.0);

  std::FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::uint32_t sites = 0;
  std::uint64_t count = 0;
  REQUIRE(std::fread(&sites, sizeof sites, 1, f) == 1);
  REQUIRE(std::fread(&count, sizeof count, 1, f) == 1);
  double first_re = 0, first_im = 0;
  REQUIRE(std::fread(&first_re, sizeof first_re, 1, f) == 1);
  REQUIRE(std::fread(&first_im, sizeof first_im, 1, f) == 1);
  std::fclose(f);
  CHECK(sites == 6);
  CHECK(count == 64);
  CHECK(first_re == psi.amps[0].real());
  CHECK(first_im == psi.amps[0].imag());

  std::filesystem::resize_file(path, 40);  // truncate into the payload
  CHECK_THROWS_AS((void)read_snapshot(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("per-amplitude step cost is size-independent within budget") {
  // throughput should scale linearly in 2^L: compare per-(amplitude*site)
  // time at two sizes and require agreement within a factor of two
  auto time_steps = [](int sites, int steps) {
    const ModelParams p{sites, 1.0, 1.0, 1.0, 0.8};
    const FloquetStepPlan plan(p);
    StateVector psi = random_full_state(sites, 5);
    plan.apply(psi);  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int n = 0; n < steps; ++n) plan.apply(psi);
    const auto stop = std::chrono::steady_clock::now();
    const Real seconds = std::chrono::duration<Real>(stop - start).count();
    return seconds / (static_cast<Real>(steps) * static_cast<Real>(1ull << sites) * sites);
  };
  std::vector<Real> small, large;
  for (int rep = 0; rep < 5; ++rep) {
    small.push_back(time_steps(12, 200));
    large.push_back(time_steps(16, 40));
  }
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  const Real ratio = large[2] / small[2];
  CAPTURE(ratio);
  CHECK(ratio < 2.0);
  CHECK(ratio > 0.5);
}
