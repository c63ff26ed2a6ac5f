#include "floq/state.hpp"

#include "floq/sector.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace floq {

namespace {

constexpr int kMaxSites = 26;

void check_sites(int sites) {
  if (sites < 2 || sites > kMaxSites)
    throw std::invalid_argument("state engine: sites must be in [2, 26]");
}

// Deterministic chunked reduction: chunk partials are accumulated in index
// order regardless of how many threads computed them.
constexpr Index kChunk = 1 << 14;

Complex chunked_dot(const VectorXcd& a, const VectorXcd& b) {
  const Index n = a.size();
  const Index chunks = (n + kChunk - 1) / kChunk;
  VectorXcd partial(chunks);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (Index c = 0; c < chunks; ++c) {
    const Index lo = c * kChunk;
    const Index len = std::min(kChunk, n - lo);
    partial[c] = a.segment(lo, len).dot(b.segment(lo, len));  // conj(a) . b
  }
  Complex acc{0, 0};
  for (Index c = 0; c < chunks; ++c) acc += partial[c];
  return acc;
}

void elementwise_multiply(VectorXcd& amps, const VectorXcd& phases) {
  const Index n = amps.size();
  Complex* a = amps.data();
  const Complex* p = phases.data();
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (Index i = 0; i < n; ++i) a[i] *= p[i];
}

void elementwise_multiply_conj(VectorXcd& amps, const VectorXcd& phases) {
  const Index n = amps.size();
  Complex* a = amps.data();
  const Complex* p = phases.data();
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (Index i = 0; i < n; ++i) a[i] *= std::conj(p[i]);
}

// In-place rotation exp(i phi X_q) on every amplitude pair (i0, i0|bit q):
//   a0' = c a0 + i s a1,  a1' = i s a0 + c a1.
void apply_x_rotation(VectorXcd& amps, int qubit, Real c, Real s) {
  const std::uint64_t mask = 1ull << qubit;
  const std::uint64_t low = mask - 1;
  const Index pairs = amps.size() >> 1;
  Complex* a = amps.data();
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (Index k = 0; k < pairs; ++k) {
    const std::uint64_t uk = static_cast<std::uint64_t>(k);
    const std::uint64_t i0 = ((uk & ~low) << 1) | (uk & low);
    const std::uint64_t i1 = i0 | mask;
    const Complex a0 = a[i0];
    const Complex a1 = a[i1];
    a[i0] = Complex{c * a0.real() - s * a1.imag(), c * a0.imag() + s * a1.real()};
    a[i1] = Complex{c * a1.real() - s * a0.imag(), c * a1.imag() + s * a0.real()};
  }
}

void apply_x_layer(VectorXcd& amps, int sites, Real c, Real s) {
  for (int q = 0; q < sites; ++q) apply_x_rotation(amps, q, c, s);
}

}  // namespace

StateVector make_basis_state(int sites, std::uint64_t b) {
  check_sites(sites);
  if (b >= (1ull << sites)) throw std::invalid_argument("make_basis_state: index out of range");
  StateVector psi{sites, VectorXcd::Zero(Index(1) << sites)};
  psi.amps[static_cast<Index>(b)] = Complex{1, 0};
  return psi;
}

Complex overlap(const StateVector& a, const StateVector& b) {
  if (a.sites != b.sites) throw std::invalid_argument("overlap: site mismatch");
  return chunked_dot(a.amps, b.amps);
}

Real expectation(const StateVector& psi, const PauliOperator& op) {
  if (psi.sites != op.sites()) throw std::invalid_argument("expectation: site mismatch");
  const Index dim = psi.amps.size();
  const Index chunks = (dim + kChunk - 1) / kChunk;
  Complex acc{0, 0};
  for (const auto& [s, c] : op.terms()) {
    VectorXcd partial = VectorXcd::Zero(chunks);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
    for (Index ch = 0; ch < chunks; ++ch) {
      Complex t{0, 0};
      const Index hi = std::min(dim, (ch + 1) * kChunk);
      for (Index b = ch * kChunk; b < hi; ++b) {
        const auto ub = static_cast<std::uint64_t>(b);
        t += std::conj(psi.amps[static_cast<Index>(ub ^ s.x)]) * basis_action_phase(s, ub) *
             psi.amps[b];
      }
      partial[ch] = t;
    }
    acc += c * partial.sum();
  }
  if (std::abs(acc.imag()) > 1e-9)
    throw std::runtime_error("expectation: non-negligible imaginary part");
  return acc.real();
}

void apply_translation(StateVector& psi) {
  const std::uint64_t dim = 1ull << psi.sites;
  VectorXcd out(psi.amps.size());
  for (std::uint64_t b = 0; b < dim; ++b)
    out[static_cast<Index>(translate_bits(b, psi.sites))] = psi.amps[static_cast<Index>(b)];
  psi.amps.swap(out);
}

Real h1_energy(const ModelParams& p, std::uint64_t b) {
  const int sites = p.sites;
  const std::uint64_t mask = (1ull << sites) - 1;
  const std::uint64_t shifted = ((b << 1) | (b >> (sites - 1))) & mask;
  // sum_j z_j z_{j+1} = L - 2 popcount(b ^ rot(b)); sum_j z_j = L - 2 popcount(b)
  const int zz = sites - 2 * std::popcount(b ^ shifted);
  const int z = sites - 2 * std::popcount(b);
  return -p.coupling_j / 4 * zz - p.field_h / 2 * z;
}

FloquetStepPlan::FloquetStepPlan(const ModelParams& p) : params_(p) {
  check_sites(p.sites);
  const std::uint64_t dim = 1ull << p.sites;
  half_phase_.resize(static_cast<Index>(dim));
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(dim); ++b)
    half_phase_[b] = std::polar(Real(1), -h1_energy(p, static_cast<std::uint64_t>(b)) * p.tau / 2);
  const Real phi = p.field_g * p.tau / 2;
  rot_cos_ = std::cos(phi);
  rot_sin_ = std::sin(phi);
}

void FloquetStepPlan::apply(StateVector& psi) const {
  if (psi.sites != params_.sites) throw std::invalid_argument("FloquetStepPlan: site mismatch");
  elementwise_multiply(psi.amps, half_phase_);
  apply_x_layer(psi.amps, params_.sites, rot_cos_, rot_sin_);
  elementwise_multiply(psi.amps, half_phase_);
}

void FloquetStepPlan::apply_adjoint(StateVector& psi) const {
  if (psi.sites != params_.sites) throw std::invalid_argument("FloquetStepPlan: site mismatch");
  elementwise_multiply_conj(psi.amps, half_phase_);
  apply_x_layer(psi.amps, params_.sites, rot_cos_, -rot_sin_);
  elementwise_multiply_conj(psi.amps, half_phase_);
}

FidelityTrace FloquetStepPlan::evolve_fidelity(const StateVector& initial, long n_max) const {
  if (initial.sites != params_.sites)
    throw std::invalid_argument("evolve_fidelity: site mismatch");
  if (n_max < 0) throw std::invalid_argument("evolve_fidelity: negative step count");

  const Index dim = initial.amps.size();
  // Work in the half-rotated frame chi_n = D^-1 psi_n, so each cycle is one
  // full-step phase table plus the X layer:
  //   chi_n = X D^2 chi_{n-1},  <psi_0|psi_n> = sum_b conj(psi_0) D chi_n.
  VectorXcd full_phase(dim);
  VectorXcd bra(dim);  // conj(psi_0) * D, contracted against chi without conj
  VectorXcd chi(dim);
  const Complex* d = half_phase_.data();
  const Complex* p0 = initial.amps.data();
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
  for (Index i = 0; i < dim; ++i) {
    full_phase[i] = d[i] * d[i];
    bra[i] = std::conj(p0[i]) * d[i];
    chi[i] = p0[i] * std::conj(d[i]);
  }

  FidelityTrace trace;
  trace.sites = params_.sites;
  trace.tau = params_.tau;
  trace.values.resize(static_cast<std::size_t>(n_max) + 1);
  trace.values[0] = std::norm(chunked_dot(initial.amps, initial.amps));
  for (long n = 1; n <= n_max; ++n) {
    elementwise_multiply(chi, full_phase);
    apply_x_layer(chi, params_.sites, rot_cos_, rot_sin_);
    // plain (non-conjugating) contraction: bra already carries the conjugate
    const Index chunks = (dim + kChunk - 1) / kChunk;
    VectorXcd partial(chunks);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
    for (Index c = 0; c < chunks; ++c) {
      const Index lo = c * kChunk;
      const Index len = std::min(kChunk, dim - lo);
      partial[c] = bra.segment(lo, len).cwiseProduct(chi.segment(lo, len)).sum();
    }
    Complex acc{0, 0};
    for (Index c = 0; c < chunks; ++c) acc += partial[c];
    trace.values[static_cast<std::size_t>(n)] = std::norm(acc);
  }
  return trace;
}

DeformedStepPlan::DeformedStepPlan(const ModelParams& p, Real epsilon)
    : sites_(p.sites), tau_(p.tau), epsilon_(epsilon) {
  check_sites(p.sites);
  if (p.sites > 14)
    throw std::invalid_argument("DeformedStepPlan: dense sub-unitaries guarded to sites <= 14");
  PauliOperator plus = build_h0(p);
  PauliOperator k_op = build_drive(p);
  PauliOperator minus = plus;
  k_op *= Complex{epsilon, 0};
  plus += k_op;
  minus -= k_op;
  const MatrixXcd plus_dense = to_dense(plus);
  const MatrixXcd minus_dense = to_dense(minus);
  // generators are real symmetric in the computational basis
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_plus(plus_dense.real());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_minus(minus_dense.real());
  plus_basis_ = es_plus.eigenvectors();
  plus_energy_ = es_plus.eigenvalues();
  minus_basis_ = es_minus.eigenvectors();
  minus_energy_ = es_minus.eigenvalues();
}

void DeformedStepPlan::apply_exponential(const MatrixXd& basis, const VectorXd& energies,
                                         Real time, VectorXcd& amps) const {
  // exp(-iAt) = B exp(-i diag t) B^T with B real: split into two real matvecs
  const VectorXd re = basis.transpose() * amps.real();
  const VectorXd im = basis.transpose() * amps.imag();
  VectorXcd rotated(amps.size());
  for (Index i = 0; i < amps.size(); ++i)
    rotated[i] = std::polar(Real(1), -energies[i] * time) * Complex{re[i], im[i]};
  const VectorXd out_re = basis * rotated.real();
  const VectorXd out_im = basis * rotated.imag();
  for (Index i = 0; i < amps.size(); ++i) amps[i] = Complex{out_re[i], out_im[i]};
}

void DeformedStepPlan::apply(StateVector& psi) const {
  if (psi.sites != sites_) throw std::invalid_argument("DeformedStepPlan: site mismatch");
  apply_exponential(plus_basis_, plus_energy_, tau_ / 2, psi.amps);
  apply_exponential(minus_basis_, minus_energy_, tau_, psi.amps);
  apply_exponential(plus_basis_, plus_energy_, tau_ / 2, psi.amps);
}

FidelityTrace DeformedStepPlan::evolve_fidelity(const StateVector& initial, long n_max) const {
  if (initial.sites != sites_) throw std::invalid_argument("evolve_fidelity: site mismatch");
  StateVector psi = initial;
  FidelityTrace trace;
  trace.sites = sites_;
  trace.tau = tau_;
  trace.values.resize(static_cast<std::size_t>(n_max) + 1);
  trace.values[0] = std::norm(overlap(initial, initial));
  for (long n = 1; n <= n_max; ++n) {
    apply(psi);
    trace.values[static_cast<std::size_t>(n)] = std::norm(overlap(initial, psi));
  }
  return trace;
}

void write_snapshot(const std::string& path, const StateVector& psi) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
  const std::uint32_t sites = static_cast<std::uint32_t>(psi.sites);
  const std::uint64_t count = static_cast<std::uint64_t>(psi.amps.size());
  out.write(reinterpret_cast<const char*>(&sites), sizeof sites);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (Index i = 0; i < psi.amps.size(); ++i) {
    const double re = psi.amps[i].real();
    const double im = psi.amps[i].imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  if (!out) throw std::runtime_error("write_snapshot: short write to " + path);
}

StateVector read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
  std::uint32_t sites = 0;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&sites), sizeof sites);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || sites < 2 || sites > kMaxSites || count != (1ull << sites))
    throw std::runtime_error("read_snapshot: malformed header in " + path);
  StateVector psi{static_cast<int>(sites), VectorXcd(static_cast<Index>(count))};
  for (std::uint64_t i = 0; i < count; ++i) {
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    psi.amps[static_cast<Index>(i)] = Complex{re, im};
  }
  if (!in) throw std::runtime_error("read_snapshot: truncated payload in " + path);
  return psi;
}

}  // namespace floq
