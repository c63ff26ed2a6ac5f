#include "floq/sector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace floq {

std::uint64_t translate_bits(std::uint64_t b, int sites) {
  const std::uint64_t mask = (sites >= 64) ? ~0ull : (1ull << sites) - 1;
  return ((b << 1) | (b >> (sites - 1))) & mask;
}

std::uint64_t reflect_bits(std::uint64_t b, int sites) {
  std::uint64_t out = 0;
  for (int j = 0; j < sites; ++j)
    out |= ((b >> j) & 1ull) << (sites - 1 - j);
  return out;
}

std::uint64_t canonical_representative(std::uint64_t b, int sites) {
  std::uint64_t best = b;
  std::uint64_t t = b;
  std::uint64_t r = reflect_bits(b, sites);
  best = std::min(best, r);
  for (int k = 1; k < sites; ++k) {
    t = translate_bits(t, sites);
    r = translate_bits(r, sites);
    best = std::min({best, t, r});
  }
  return best;
}

SectorBasis SectorBasis::build(int sites) {
  if (sites < 2 || sites > 26)
    throw std::invalid_argument("SectorBasis::build: sites must be in [2, 26]");
  SectorBasis basis;
  basis.sites_ = sites;
  const std::uint64_t dim_full = 1ull << sites;
  basis.canon_index_.assign(dim_full, -1);

  // One ascending pass: a state equal to its canonical form opens a new
  // orbit; orbit sizes follow from the stabilizer via orbit-stabilizer.
  for (std::uint64_t b = 0; b < dim_full; ++b) {
    if (canonical_representative(b, sites) != b) continue;
    int stabilizer = 0;
    std::uint64_t t = b;
    std::uint64_t r = reflect_bits(b, sites);
    for (int k = 0; k < sites; ++k) {
      if (k > 0) {
        t = translate_bits(t, sites);
        r = translate_bits(r, sites);
      }
      stabilizer += (t == b) + (r == b);
    }
    const int orbit = 2 * sites / stabilizer;
    basis.reps_.push_back(b);
    basis.sqrt_orbit_.push_back(std::sqrt(static_cast<Real>(orbit)));
    basis.inv_sqrt_orbit_.push_back(Real(1) / basis.sqrt_orbit_.back());
  }

  // Second pass fills the full-basis index table by walking each orbit once.
  for (std::size_t i = 0; i < basis.reps_.size(); ++i) {
    const std::uint64_t rep = basis.reps_[i];
    std::uint64_t t = rep;
    std::uint64_t r = reflect_bits(rep, sites);
    for (int k = 0; k < sites; ++k) {
      if (k > 0) {
        t = translate_bits(t, sites);
        r = translate_bits(r, sites);
      }
      basis.canon_index_[t] = static_cast<std::int32_t>(i);
      basis.canon_index_[r] = static_cast<std::int32_t>(i);
    }
  }
  return basis;
}

Index SectorBasis::index_of(std::uint64_t b) const {
  return static_cast<Index>(canon_index_[b]);
}

MatrixXcd SectorBasis::project(const PauliOperator& op) const {
  if (op.sites() != sites_) throw std::invalid_argument("SectorBasis::project: site mismatch");
  const Index d = dim();
  if (d > 12000) throw std::invalid_argument("SectorBasis::project: dense block too large");
  MatrixXcd m = MatrixXcd::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const std::uint64_t rep = reps_[static_cast<std::size_t>(i)];
    for (const auto& [s, c] : op.terms()) {
      const std::uint64_t target = rep ^ s.x;
      const Index j = index_of(target);
      m(j, i) += c * basis_action_phase(s, rep) * sqrt_orbit_[static_cast<std::size_t>(i)] *
                 inv_sqrt_orbit_[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

MatrixXd SectorBasis::project_real(const PauliOperator& op) const {
  const std::vector<CompiledRealTerm> terms = compile_real(op);
  const Index d = dim();
  if (d > 12000) throw std::invalid_argument("SectorBasis::project_real: dense block too large");
  MatrixXd m = MatrixXd::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    const std::uint64_t rep = reps_[static_cast<std::size_t>(i)];
    for (const auto& t : terms) {
      const Index j = index_of(rep ^ t.x);
      const Real sign = (std::popcount(t.z & rep) & 1) ? Real(-1) : Real(1);
      m(j, i) += sign * t.coeff * sqrt_orbit_[static_cast<std::size_t>(i)] *
                 inv_sqrt_orbit_[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

VectorXd SectorBasis::diagonal(const PauliOperator& op) const {
  if (op.sites() != sites_) throw std::invalid_argument("SectorBasis::diagonal: site mismatch");
  const Index d = dim();
  VectorXd e(d);
  for (const auto& [s, c] : op.terms())
    if (s.x != 0) throw std::invalid_argument("SectorBasis::diagonal: operator is not all-Z");
  for (Index i = 0; i < d; ++i) {
    const std::uint64_t rep = reps_[static_cast<std::size_t>(i)];
    Real acc = 0;
    for (const auto& [s, c] : op.terms())
      acc += c.real() * ((std::popcount(s.z & rep) & 1) ? Real(-1) : Real(1));
    e[i] = acc;
  }
  return e;
}

std::vector<CompiledRealTerm> SectorBasis::compile_real(const PauliOperator& op) const {
  if (op.sites() != sites_)
    throw std::invalid_argument("SectorBasis::compile_real: site mismatch");
  std::vector<CompiledRealTerm> out;
  out.reserve(static_cast<std::size_t>(op.term_count()));
  for (const auto& [s, c] : op.terms()) {
    if (std::abs(c.imag()) > 1e-12)
      throw std::invalid_argument("SectorBasis::compile_real: complex coefficient");
    const int y_count = std::popcount(s.x & s.z);
    if (y_count & 1)
      throw std::invalid_argument("SectorBasis::compile_real: odd-Y string is not real");
    // i^{y_count} = +-1 folds into the coefficient; the remaining sign is
    // (-1)^{popcount(z & b)} evaluated per basis state.
    const Real fold = (y_count & 2) ? Real(-1) : Real(1);
    out.push_back({s.x, s.z, fold * c.real()});
  }
  return out;
}

void SectorBasis::apply(const std::vector<CompiledRealTerm>& terms, const VectorXd& v,
                        VectorXd& w) const {
  const Index d = dim();
  if (v.size() != d) throw std::invalid_argument("SectorBasis::apply: dimension mismatch");
  w.resize(d);
  const std::uint64_t* reps = reps_.data();
  const Real* sq = sqrt_orbit_.data();
  const Real* isq = inv_sqrt_orbit_.data();
  // Row form of the (symmetric) sector matrix: each output entry gathers
  // from the orbits reached by one term application, so rows are independent.
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (Index i = 0; i < d; ++i) {
    const std::uint64_t rep = reps[i];
    Real acc = 0;
    for (const auto& t : terms) {
      const Index j = static_cast<Index>(canon_index_[rep ^ t.x]);
      const Real sign = (std::popcount(t.z & rep) & 1) ? Real(-1) : Real(1);
      acc += sign * t.coeff * sq[i] * isq[j] * v[j];
    }
    w[i] = acc;
  }
}

VectorXcd SectorBasis::lift(const VectorXcd& sector_vec) const {
  if (sector_vec.size() != dim()) throw std::invalid_argument("SectorBasis::lift: dimension");
  const std::uint64_t dim_full = 1ull << sites_;
  VectorXcd full(static_cast<Index>(dim_full));
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(dim_full); ++b) {
    const auto i = static_cast<std::size_t>(canon_index_[static_cast<std::uint64_t>(b)]);
    full[b] = sector_vec[static_cast<Index>(i)] * inv_sqrt_orbit_[i];
  }
  return full;
}

VectorXcd SectorBasis::lift(const VectorXd& sector_vec) const {
  return lift(VectorXcd(sector_vec.cast<Complex>()));
}

VectorXcd SectorBasis::project_state(const VectorXcd& full) const {
  if (full.size() != static_cast<Index>(1ull << sites_))
    throw std::invalid_argument("SectorBasis::project_state: dimension");
  VectorXcd v = VectorXcd::Zero(dim());
  for (std::uint64_t b = 0; b < (1ull << sites_); ++b)
    v[static_cast<Index>(canon_index_[b])] += full[static_cast<Index>(b)];
  for (Index i = 0; i < dim(); ++i) v[i] *= inv_sqrt_orbit_[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace floq
