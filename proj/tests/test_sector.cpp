#include "floq/sector.hpp"

#include <doctest.h>

#include "oracle_helpers.hpp"

#include <numeric>
#include <set>

using namespace floq;

namespace {

// Independent orbit enumeration: freeze each orbit as an explicit set.
std::vector<std::set<std::uint64_t>> brute_force_orbits(int sites) {
  std::vector<std::set<std::uint64_t>> orbits;
  std::set<std::uint64_t> seen;
  for (std::uint64_t b = 0; b < (1ull << sites); ++b) {
    if (seen.count(b)) continue;
    std::set<std::uint64_t> orbit;
    std::uint64_t t = b;
    for (int k = 0; k < sites; ++k) {
      orbit.insert(t);
      orbit.insert(reflect_bits(t, sites));
      t = translate_bits(t, sites);
    }
    seen.insert(orbit.begin(), orbit.end());
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

std::uint64_t gcd_u(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

// Embedding matrix B whose columns are the lifted sector basis vectors.
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

TEST_CASE("bit helpers") {
  CHECK(translate_bits(0b000001, 6) == 0b000010);
  CHECK(translate_bits(0b100000, 6) == 0b000001);
  CHECK(reflect_bits(0b000011, 6) == 0b110000);
  CHECK(reflect_bits(0b010110, 5) == 0b01101);
  for (std::uint64_t b = 0; b < 64; ++b) {
    std::uint64_t t = b;
    for (int k = 0; k < 6; ++k) t = translate_bits(t, 6);
    CHECK(t == b);
    CHECK(reflect_bits(reflect_bits(b, 6), 6) == b);
  }
}

TEST_CASE("orbit census matches brute force") {
  for (int sites = 2; sites <= 10; ++sites) {
    CAPTURE(sites);
    const SectorBasis basis = SectorBasis::build(sites);
    const auto orbits = brute_force_orbits(sites);
    REQUIRE(basis.dim() == static_cast<Index>(orbits.size()));
    Real total = 0;
    for (Index i = 0; i < basis.dim(); ++i) {
      const std::uint64_t rep = basis.representative(i);
      // representative is the orbit minimum and sizes agree
      const auto it =
          std::find_if(orbits.begin(), orbits.end(),
                       [rep](const auto& o) { return o.count(rep) > 0; });
      REQUIRE(it != orbits.end());
      CHECK(*it->begin() == rep);
      CHECK(basis.orbit_size(i) == doctest::Approx(static_cast<Real>(it->size())));
      total += basis.orbit_size(i);
    }
    CHECK(total == doctest::Approx(static_cast<Real>(1ull << sites)));
  }
  CHECK(SectorBasis::build(2).dim() == 3);
  CHECK(SectorBasis::build(8).dim() == 30);
}

TEST_CASE("momentum-sector dimensions complete the Hilbert space") {
  // dim(momentum k) = (1/L) sum_j exp(-2 pi i k j / L) tr(T^j) with
  // tr(T^j) = 2^gcd(j, L); summing over k recovers 2^L, and the zero-momentum
  // reflection-even block equals the orbit count.
  for (int sites : {4, 6, 8}) {
    CAPTURE(sites);
    const Index full = Index(1) << sites;
    Real sum_k = 0;
    for (int k = 0; k < sites; ++k) {
      Complex dim_k{0, 0};
      for (int j = 0; j < sites; ++j) {
        const Real angle = -2 * kPi * k * j / sites;
        dim_k += std::polar(Real(1), angle) *
                 Real(1ull << gcd_u(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(sites)));
      }
      dim_k /= Real(sites);
      CHECK(std::abs(dim_k.imag()) < 1e-9);
      sum_k += dim_k.real();
    }
    CHECK(sum_k == doctest::Approx(static_cast<Real>(full)));

    // brute-force fixed points of R T^j
    Real reflect_traces = 0;
    for (int j = 0; j < sites; ++j) {
      int fixed = 0;
      for (std::uint64_t b = 0; b < (1ull << sites); ++b) {
        std::uint64_t t = b;
        for (int s = 0; s < j; ++s) t = translate_bits(t, sites);
        if (reflect_bits(t, sites) == b) ++fixed;
      }
      reflect_traces += fixed;
    }
    Real translate_traces = 0;
    for (int j = 0; j < sites; ++j)
      translate_traces +=
          Real(1ull << gcd_u(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(sites)));
    const Real d_even = (translate_traces + reflect_traces) / (2 * sites);
    CHECK(SectorBasis::build(sites).dim() == static_cast<Index>(d_even + 0.5));
  }
}

TEST_CASE("embedding is isometric and block-diagonalizes symmetric operators") {
  const int sites = 8;
  const SectorBasis basis = SectorBasis::build(sites);
  const MatrixXcd b = embedding(basis);
  CHECK((b.adjoint() * b - MatrixXcd::Identity(basis.dim(), basis.dim()))
            .cwiseAbs()
            .maxCoeff() < 1e-13);

  const ModelParams p{sites, 1.0, 1.0, 1.0, 0.5};
  for (const PauliOperator& op :
       {build_h1(p), build_h2(p), magnus_truncation(p, 1), build_mz(sites)}) {
    const MatrixXcd full = oracle::dense_operator(op);
    const MatrixXcd block = b.adjoint() * full * b;
    // operator commutes with the symmetry projector: P H P = H restricted
    CHECK((full * b - b * block).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((basis.project(op) - block).cwiseAbs().maxCoeff() < 1e-12);
    const MatrixXd real_block = basis.project_real(op);
    CHECK((real_block.cast<Complex>() - block).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((real_block - real_block.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("matrix-free apply agrees with the dense block") {
  const int sites = 10;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 1.0, 1.0, 1.0, 0.5};
  const PauliOperator h = magnus_truncation(p, 1);
  const MatrixXd block = basis.project_real(h);
  const auto terms = basis.compile_real(h);
  std::mt19937_64 rng(5);
  std::normal_distribution<Real> gauss(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    VectorXd v(basis.dim());
    for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    VectorXd w;
    basis.apply(terms, v, w);
    CHECK((w - block * v).cwiseAbs().maxCoeff() < 1e-11 * v.cwiseAbs().maxCoeff());
  }
  PauliOperator odd(sites);
  odd.add(from_letters("YIIIIIIIII"), Complex{1, 0});
  CHECK_THROWS_AS((void)basis.compile_real(odd), std::invalid_argument);
}

TEST_CASE("diagonal entries of all-Z operators") {
  const int sites = 9;
  const SectorBasis basis = SectorBasis::build(sites);
  const ModelParams p{sites, 0.9, 1.1, 1.0, 0.0};
  const PauliOperator h1 = build_h1(p);
  const VectorXd diag = basis.diagonal(h1);
  const MatrixXd block = basis.project_real(h1);
  CHECK((block - MatrixXd(diag.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS((void)basis.diagonal(build_h2(p)), std::invalid_argument);
}

TEST_CASE("lift and project round trips") {
  const int sites = 8;
  const SectorBasis basis = SectorBasis::build(sites);
  const VectorXcd v = oracle::random_state(basis.dim(), 99);
  const VectorXcd full = basis.lift(v);
  CHECK(std::abs(full.norm() - 1.0) < 1e-13);
  CHECK((basis.project_state(full) - v).cwiseAbs().maxCoeff() < 1e-13);

  // lifted vectors are translation and reflection invariant
  VectorXcd translated(full.size());
  VectorXcd reflected(full.size());
  for (std::uint64_t b = 0; b < (1ull << sites); ++b) {
    translated[static_cast<Index>(translate_bits(b, sites))] = full[static_cast<Index>(b)];
    reflected[static_cast<Index>(reflect_bits(b, sites))] = full[static_cast<Index>(b)];
  }
  CHECK((translated - full).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((reflected - full).cwiseAbs().maxCoeff() < 1e-14);

  // projection of an asymmetric state keeps only the symmetric part
  VectorXcd skew = VectorXcd::Zero(full.size());
  skew[1] = Complex{1, 0};  // basis state 000...01
  const VectorXcd proj = basis.project_state(skew);
  const Index orbit_idx = basis.index_of(1);
  CHECK(std::abs(proj[orbit_idx] - Complex{1, 0} / std::sqrt(basis.orbit_size(orbit_idx))) < 1e-14);
}
