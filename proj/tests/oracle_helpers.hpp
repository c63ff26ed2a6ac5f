#pragma once

// Test-only reference constructions, deliberately independent of the library
// code paths: dense operators are assembled by explicit Kronecker products of
// 2x2 letter matrices, and propagators by Pade matrix exponentials.

#include "floq/pauli.hpp"
#include "floq/types.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>
#include <stdexcept>
#include <string>

namespace oracle {

using floq::Complex;
using floq::Index;
using floq::MatrixXcd;
using floq::Real;
using floq::VectorXcd;

inline MatrixXcd letter_matrix(char letter) {
  MatrixXcd m(2, 2);
  switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << Complex{0, 0}, Complex{0, -1}, Complex{0, 1}, Complex{0, 0}; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("letter_matrix: expected one of IXYZ");
  }
  return m;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Site 0 is the fastest-varying index bit, i.e. the rightmost Kronecker
// factor: M = letter[L-1] (x) ... (x) letter[0].
inline MatrixXcd dense_from_letters(const std::string& letters) {
  MatrixXcd m = letter_matrix(letters.back());
  for (auto it = std::next(letters.rbegin()); it != letters.rend(); ++it)
    m = kron(m, letter_matrix(*it));
  return m;
}

inline MatrixXcd dense_operator(const floq::PauliOperator& op) {
  const Index dim = Index(1) << op.sites();
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (const auto& [s, c] : op.terms())
    m += c * dense_from_letters(floq::to_letters(s, op.sites()));
  return m;
}

// exp(-i H t) through the Pade-based matrix exponential, independent of the
// eigendecomposition route used by the library.
inline MatrixXcd propagator(const floq::PauliOperator& h, Real t) {
  const MatrixXcd m = Complex{0, -1} * t * dense_operator(h);
  return m.exp();
}

inline VectorXcd random_state(Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> gauss(0, 1);
  VectorXcd v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = Complex{gauss(rng), gauss(rng)};
  v.normalize();
  return v;
}

}  // namespace oracle
