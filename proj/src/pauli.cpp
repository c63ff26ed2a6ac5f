#include "floq/pauli.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace floq {

namespace {

std::uint64_t site_mask(int sites) {
  return sites >= 64 ? ~0ull : (1ull << sites) - 1;
}

int parity(std::uint64_t v) { return std::popcount(v) & 1; }

constexpr Complex kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

int product_phase_exponent(const PauliString& a, const PauliString& b) {
  // S = i^{c} B with c = popcount(x & z); merging the bare products costs
  // (-1)^{a.z & b.x} from commuting Z factors of `a` past X factors of `b`.
  const int ca = std::popcount(a.x & a.z);
  const int cb = std::popcount(b.x & b.z);
  const int cab = std::popcount((a.x ^ b.x) & (a.z ^ b.z));
  const int swaps = parity(a.z & b.x);
  return (ca + cb - cab + 2 * swaps) & 3;
}

bool strings_commute(const PauliString& a, const PauliString& b) {
  return (parity(a.x & b.z) ^ parity(a.z & b.x)) == 0;
}

Complex basis_action_phase(const PauliString& s, std::uint64_t b) {
  const int k = (std::popcount(s.x & s.z) + 2 * parity(s.z & b)) & 3;
  return kPhase[k];
}

std::string to_letters(const PauliString& s, int sites) {
  std::string out(static_cast<std::size_t>(sites), 'I');
  for (int j = 0; j < sites; ++j) {
    const bool xb = (s.x >> j) & 1u;
    const bool zb = (s.z >> j) & 1u;
    if (xb && zb)
      out[static_cast<std::size_t>(j)] = 'Y';
    else if (xb)
      out[static_cast<std::size_t>(j)] = 'X';
    else if (zb)
      out[static_cast<std::size_t>(j)] = 'Z';
  }
  return out;
}

PauliString from_letters(const std::string& letters) {
  if (letters.size() > 64) throw std::invalid_argument("pauli letters: more than 64 sites");
  PauliString s;
  for (std::size_t j = 0; j < letters.size(); ++j) {
    const std::uint64_t bit = 1ull << j;
    switch (letters[j]) {
      case 'I': break;
      case 'X': s.x |= bit; break;
      case 'Y': s.x |= bit; s.z |= bit; break;
      case 'Z': s.z |= bit; break;
      default: throw std::invalid_argument("pauli letters: expected one of IXYZ");
    }
  }
  return s;
}

PauliOperator::PauliOperator(int sites) : sites_(sites) {
  if (sites < 1 || sites > 62) throw std::invalid_argument("PauliOperator: sites out of range");
}

PauliOperator& PauliOperator::add(const PauliString& s, Complex coeff) {
  if (((s.x | s.z) & ~site_mask(sites_)) != 0)
    throw std::invalid_argument("PauliOperator::add: mask exceeds site count");
  auto [it, inserted] = terms_.try_emplace(s, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) < prune_threshold) terms_.erase(it);
  return *this;
}

Complex PauliOperator::coefficient(const PauliString& s) const {
  const auto it = terms_.find(s);
  return it == terms_.end() ? Complex{0, 0} : it->second;
}

Real PauliOperator::max_abs_imag() const {
  Real m = 0;
  for (const auto& [s, c] : terms_) m = std::max(m, std::abs(c.imag()));
  return m;
}

Real PauliOperator::coefficient_norm1() const {
  Real n = 0;
  for (const auto& [s, c] : terms_) n += std::abs(c);
  return n;
}

PauliOperator& PauliOperator::require_real(Real tol) {
  if (max_abs_imag() > tol)
    throw std::runtime_error("PauliOperator::require_real: imaginary coefficients above tolerance");
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second = Complex{it->second.real(), 0};
    it = std::abs(it->second) < prune_threshold ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

PauliOperator& PauliOperator::operator+=(const PauliOperator& other) {
  if (other.sites_ != sites_) throw std::invalid_argument("PauliOperator: site counts differ");
  for (const auto& [s, c] : other.terms_) add(s, c);
  return *this;
}

PauliOperator& PauliOperator::operator-=(const PauliOperator& other) {
  if (other.sites_ != sites_) throw std::invalid_argument("PauliOperator: site counts differ");
  for (const auto& [s, c] : other.terms_) add(s, -c);
  return *this;
}

PauliOperator& PauliOperator::operator*=(Complex scale) {
  if (std::abs(scale) < prune_threshold) {
    terms_.clear();
    return *this;
  }
  for (auto& [s, c] : terms_) c *= scale;
  return *this;
}

PauliOperator multiply(const PauliOperator& a, const PauliOperator& b) {
  if (a.sites() != b.sites()) throw std::invalid_argument("multiply: site counts differ");
  PauliOperator out(a.sites());
  for (const auto& [sa, ca] : a.terms())
    for (const auto& [sb, cb] : b.terms()) {
      const PauliString sp{sa.x ^ sb.x, sa.z ^ sb.z};
      out.add(sp, ca * cb * kPhase[product_phase_exponent(sa, sb)]);
    }
  return out;
}

PauliOperator commutator(const PauliOperator& a, const PauliOperator& b) {
  if (a.sites() != b.sites()) throw std::invalid_argument("commutator: site counts differ");
  PauliOperator out(a.sites());
  for (const auto& [sa, ca] : a.terms())
    for (const auto& [sb, cb] : b.terms()) {
      if (strings_commute(sa, sb)) continue;  // AB and BA cancel exactly
      const PauliString sp{sa.x ^ sb.x, sa.z ^ sb.z};
      out.add(sp, Real(2) * ca * cb * kPhase[product_phase_exponent(sa, sb)]);
    }
  return out;
}

PauliOperator build_h1(const ModelParams& p) {
  if (p.sites < 2) throw std::invalid_argument("build_h1: need at least 2 sites");
  PauliOperator h(p.sites);
  for (int j = 0; j < p.sites; ++j) {
    const int jn = (j + 1) % p.sites;
    const std::uint64_t zz = (1ull << j) | (1ull << jn);
    h.add(PauliString{0, zz}, Complex{-p.coupling_j / 4, 0});
    h.add(PauliString{0, 1ull << j}, Complex{-p.field_h / 2, 0});
  }
  return h;
}

PauliOperator build_h2(const ModelParams& p) {
  if (p.sites < 2) throw std::invalid_argument("build_h2: need at least 2 sites");
  PauliOperator h(p.sites);
  for (int j = 0; j < p.sites; ++j)
    h.add(PauliString{1ull << j, 0}, Complex{-p.field_g / 2, 0});
  return h;
}

PauliOperator build_h0(const ModelParams& p) {
  PauliOperator h = build_h1(p);
  h += build_h2(p);
  h *= Complex{0.5, 0};
  return h;
}

PauliOperator build_drive(const ModelParams& p) {
  PauliOperator k = build_h1(p);
  k -= build_h2(p);
  k *= Complex{0.5, 0};
  return k;
}

PauliOperator build_mz(int sites) {
  PauliOperator m(sites);
  const Real c = Real(1) / sites;
  for (int j = 0; j < sites; ++j) m.add(PauliString{0, 1ull << j}, Complex{c, 0});
  return m;
}

PauliOperator build_tilted_magnetization(int sites) {
  PauliOperator m(sites);
  const Real c = Real(1) / std::sqrt(Real(2));
  for (int j = 0; j < sites; ++j) {
    m.add(PauliString{1ull << j, 0}, Complex{c, 0});
    m.add(PauliString{0, 1ull << j}, Complex{c, 0});
  }
  return m;
}

namespace {

// Operators graded by powers of tau; index = degree, entry = coefficient
// operator of tau^degree.  Degree 0 is unused (generators start at degree 1)
// and everything beyond degree 3 is truncated.
struct Graded {
  std::array<PauliOperator, 4> deg;

  explicit Graded(int sites) : deg{PauliOperator(sites), PauliOperator(sites),
                                   PauliOperator(sites), PauliOperator(sites)} {}
};

Graded graded_add(Graded a, const Graded& b) {
  for (int d = 1; d <= 3; ++d) a.deg[d] += b.deg[d];
  return a;
}

Graded graded_scale(Graded a, Complex s) {
  for (int d = 1; d <= 3; ++d) a.deg[d] *= s;
  return a;
}

Graded graded_commutator(const Graded& a, const Graded& b) {
  Graded out(a.deg[1].sites());
  for (int da = 1; da <= 2; ++da)
    for (int db = 1; db + da <= 3; ++db) {
      if (a.deg[da].empty() || b.deg[db].empty()) continue;
      out.deg[da + db] += commutator(a.deg[da], b.deg[db]);
    }
  return out;
}

// log(e^X e^Y) = X + Y + [X,Y]/2 + ([X,[X,Y]] + [Y,[Y,X]])/12 + ...,
// exact through total degree 3 when X and Y start at degree 1 (the omitted
// -[Y,[X,[X,Y]]]/24 term is degree >= 4).
Graded bch_log_degree3(const Graded& x, const Graded& y) {
  const Graded u = graded_commutator(x, y);
  Graded z = graded_add(x, y);
  z = graded_add(z, graded_scale(u, Complex{0.5, 0}));
  const Real c = Real(1) / 12;
  z = graded_add(z, graded_scale(graded_commutator(x, u), Complex{c, 0}));
  z = graded_add(z, graded_scale(graded_commutator(y, u), Complex{-c, 0}));
  return z;
}

}  // namespace

PauliOperator magnus_truncation(const ModelParams& p, int order_k) {
  if (order_k != 0 && order_k != 1)
    throw std::invalid_argument("magnus_truncation: supported orders are k = 0 and k = 1");
  PauliOperator h0 = build_h1(p);
  h0 += build_h2(p);
  if (order_k == 0) return h0;

  // One cycle is exp(A/2) exp(B) exp(A/2) with A = -i tau H1, B = -i tau H2;
  // compose the logs mechanically at unit tau and restore powers at the end.
  const Complex mi{0, -1};
  Graded a_half(p.sites), b(p.sites);
  a_half.deg[1] = Complex{0, -0.5} * build_h1(p);
  b.deg[1] = mi * build_h2(p);
  const Graded z1 = bch_log_degree3(a_half, b);
  const Graded z = bch_log_degree3(z1, a_half);

  // Time symmetry of the splitting forbids even powers of tau in the log.
  if (z.deg[2].coefficient_norm1() > 1e-12)
    throw std::runtime_error("magnus_truncation: degree-2 terms failed to cancel");

  const Complex i{0, 1};
  PauliOperator h_eff = i * z.deg[1];
  h_eff.require_real();
  PauliOperator h2corr = i * z.deg[3];
  h2corr.require_real();
  h2corr *= Complex{p.tau * p.tau, 0};
  h_eff += h2corr;
  return h_eff;
}

Real magnus_term_ratio(const ModelParams& p) {
  const PauliOperator h0 = magnus_truncation(p, 0);
  PauliOperator corr = magnus_truncation(p, 1);
  corr -= h0;
  return corr.coefficient_norm1() / h0.coefficient_norm1();
}

Real spectral_norm_bound(const PauliOperator& op) { return op.coefficient_norm1(); }

MatrixXcd to_dense(const PauliOperator& op) {
  if (op.sites() > 14) throw std::invalid_argument("to_dense: guarded to sites <= 14");
  const Index dim = Index(1) << op.sites();
  MatrixXcd m = MatrixXcd::Zero(dim, dim);
  for (const auto& [s, c] : op.terms())
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b)
      m(static_cast<Index>(b ^ s.x), static_cast<Index>(b)) += c * basis_action_phase(s, b);
  return m;
}

std::string to_json_text(const PauliOperator& op) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [s, c] : op.terms())
    arr.push_back({{"string", to_letters(s, op.sites())}, {"re", c.real()}, {"im", c.imag()}});
  return arr.dump(2);
}

PauliOperator operator_from_json_text(const std::string& text) {
  const nlohmann::json arr = nlohmann::json::parse(text);
  if (!arr.is_array() || arr.empty())
    throw std::invalid_argument("operator_from_json_text: expected a non-empty term list");
  const std::string first = arr.front().at("string").get<std::string>();
  PauliOperator op(static_cast<int>(first.size()));
  for (const auto& item : arr) {
    const std::string letters = item.at("string").get<std::string>();
    if (letters.size() != first.size())
      throw std::invalid_argument("operator_from_json_text: inconsistent site counts");
    op.add(from_letters(letters),
           Complex{item.at("re").get<Real>(), item.at("im").get<Real>()});
  }
  return op;
}

}  // namespace floq
