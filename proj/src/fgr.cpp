#include "floq/fgr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace floq {

namespace {

Real gaussian_delta(Real e, Real delta) {
  const Real u = e / delta;
  return std::exp(-u * u) / (delta * std::sqrt(kPi));
}

}  // namespace

FgrModel fgr_rates(const ModelParams& p, Real epsilon, const SectorBasis& basis, Real delta) {
  if (p.sites > 14) throw std::invalid_argument("fgr_rates: dense route guarded to L <= 14");
  if (p.tau <= 0) throw std::invalid_argument("fgr_rates: tau must be positive");

  FgrModel model;
  model.tau = p.tau;
  model.epsilon = epsilon;
  model.delta = delta > 0 ? delta : 0.035 * p.sites;
  model.omega = kPi / p.tau;
  model.period = 2 * p.tau;

  const SectorEigensystem h0 = dense_sector_eigensystem(build_h0(p), basis);
  model.energies = h0.energies;
  model.eigenvectors = h0.vectors;

  const SectorDeformedBuilder builder(p, epsilon, basis);
  const MatrixXcd u_eigen =
      h0.vectors.transpose().cast<Complex>() * builder.unitary(p.tau) * h0.vectors.cast<Complex>();

  const Index d = h0.energies.size();
  const Real span = h0.energies[d - 1] - h0.energies[0];
  model.harmonics = static_cast<int>(std::ceil((span + 6 * model.delta) / model.omega));

  const Real prefactor = 2 * kPi / (model.period * model.period);
  model.rates = MatrixXd::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index jp = 0; jp < d; ++jp) {
      if (jp == j) continue;
      const Real gap = model.energies[jp] - model.energies[j];
      Real comb = 0;
      for (int l = -model.harmonics; l <= model.harmonics; ++l)
        comb += gaussian_delta(gap - l * model.omega, model.delta);
      model.rates(j, jp) = prefactor * std::norm(u_eigen(jp, j)) * comb;
    }
  }
  return model;
}

namespace {

// Dormand-Prince 5(4) pair.
struct DormandPrince {
  static constexpr Real a21 = 1.0 / 5;
  static constexpr Real a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
  static constexpr Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr Real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr Real e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

bool inside_simplex(const VectorXd& p) {
  if (p.minCoeff() < -1e-9) return false;
  return std::abs(p.sum() - 1.0) <= 1e-9;
}

}  // namespace

MasterTrajectory evolve_master(const FgrModel& model, Index j0, const VectorXd& times) {
  const Index d = model.energies.size();
  if (j0 < 0 || j0 >= d) throw std::invalid_argument("evolve_master: initial state out of range");
  if (times.size() == 0 || times[0] < 0)
    throw std::invalid_argument("evolve_master: times must start at t >= 0");
  for (Index i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw std::invalid_argument("evolve_master: times must be ascending");

  // generator: gain through w_{j'->j}, loss through the summed outflow
  MatrixXd generator = model.rates.transpose();
  const VectorXd outflow = model.rates.rowwise().sum();
  generator.diagonal() -= outflow;

  MasterTrajectory out;
  out.times = times;
  out.probabilities.resize(times.size(), d);

  VectorXd p = VectorXd::Zero(d);
  p[j0] = 1.0;
  Real t = 0;

  const Real max_rate = std::max(outflow.maxCoeff(), 1e-12);
  Real h = std::min(0.1 / max_rate, times[times.size() - 1] + 1e-12);
  constexpr Real atol = 1e-12, rtol = 1e-9;

  VectorXd k1 = generator * p;
  for (Index idx = 0; idx < times.size(); ++idx) {
    const Real t_target = times[idx];
    long steps = 0;
    while (t < t_target) {
      const Real stride = std::min(h, t_target - t);
      const VectorXd k2 = generator * (p + stride * (DormandPrince::a21 * k1));
      const VectorXd k3 =
          generator * (p + stride * (DormandPrince::a31 * k1 + DormandPrince::a32 * k2));
      const VectorXd k4 = generator * (p + stride * (DormandPrince::a41 * k1 +
                                                     DormandPrince::a42 * k2 +
                                                     DormandPrince::a43 * k3));
      const VectorXd k5 =
          generator * (p + stride * (DormandPrince::a51 * k1 + DormandPrince::a52 * k2 +
                                     DormandPrince::a53 * k3 + DormandPrince::a54 * k4));
      const VectorXd k6 =
          generator * (p + stride * (DormandPrince::a61 * k1 + DormandPrince::a62 * k2 +
                                     DormandPrince::a63 * k3 + DormandPrince::a64 * k4 +
                                     DormandPrince::a65 * k5));
      const VectorXd next =
          p + stride * (DormandPrince::b1 * k1 + DormandPrince::b3 * k3 + DormandPrince::b4 * k4 +
                        DormandPrince::b5 * k5 + DormandPrince::b6 * k6);
      const VectorXd k7 = generator * next;
      const VectorXd err_vec =
          stride * (DormandPrince::e1 * k1 + DormandPrince::e3 * k3 + DormandPrince::e4 * k4 +
                    DormandPrince::e5 * k5 + DormandPrince::e6 * k6 + DormandPrince::e7 * k7);

      Real err = 0;
      for (Index i = 0; i < d; ++i)
        err = std::max(err, std::abs(err_vec[i]) / (atol + rtol * std::abs(next[i])));

      if (err <= 1.0 && inside_simplex(next)) {
        t += stride;
        p = next;
        k1 = k7;  // first-same-as-last
        if (err > 1e-30) h = stride * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      } else {
        h = stride * std::clamp(err > 1.0 ? 0.9 * std::pow(err, -0.2) : 0.5, 0.05, 0.9);
        if (h < 1e-13 * std::max(t_target, 1.0))
          throw std::runtime_error("evolve_master: step size collapsed");
      }
      if (++steps > 50'000'000) throw std::runtime_error("evolve_master: step budget exhausted");
    }
    out.probabilities.row(idx) = p.transpose();
  }
  return out;
}

FidelityTrace fgr_fidelity_trace(const FgrModel& model, Index j0, long n_max) {
  VectorXd times(n_max);
  for (long n = 1; n <= n_max; ++n) times[n - 1] = static_cast<Real>(n) * model.tau;
  const MasterTrajectory trajectory = evolve_master(model, j0, times);

  FidelityTrace trace;
  trace.sites = 0;  // sector-level object; the caller knows L
  trace.tau = model.tau;
  trace.initial_state = "eigenstate:" + std::to_string(j0);
  trace.values.resize(static_cast<std::size_t>(n_max) + 1);
  trace.values[0] = 1.0;
  for (long n = 1; n <= n_max; ++n) {
    const Real pj = trajectory.probabilities(n - 1, j0);
    trace.values[static_cast<std::size_t>(n)] = pj * pj;
  }
  return trace;
}

SpectralFunction spectral_function(const SectorEigensystem& h0, const MatrixXd& k_sector,
                                   const std::vector<Index>& j_select, Real delta) {
  if (delta <= 0) throw std::invalid_argument("spectral_function: delta must be positive");
  const Index d = h0.energies.size();
  for (Index j : j_select)
    if (j < 0 || j >= d) throw std::invalid_argument("spectral_function: state out of range");

  const MatrixXd k_eigen = h0.vectors.transpose() * k_sector * h0.vectors;
  const Real span = h0.energies[d - 1] - h0.energies[0];
  const Real reach = span + 6 * delta;
  const Real spacing = delta / 10;
  const Index half = static_cast<Index>(std::ceil(reach / spacing));

  SpectralFunction out;
  out.states = j_select;
  out.omegas.resize(2 * half + 1);
  for (Index i = 0; i <= 2 * half; ++i) out.omegas[i] = (i - half) * spacing;

  out.phi = MatrixXd::Zero(out.omegas.size(), static_cast<Index>(j_select.size()));
  out.phi_state_average = VectorXd::Zero(out.omegas.size());

  for (Index w = 0; w < out.omegas.size(); ++w) {
    const Real omega = out.omegas[w];
    for (Index j = 0; j < d; ++j) {
      Real phi_j = 0;
      for (Index jp = 0; jp < d; ++jp) {
        const Real weight = k_eigen(jp, j) * k_eigen(jp, j);
        phi_j += weight * gaussian_delta(h0.energies[jp] - h0.energies[j] - omega, delta);
      }
      out.phi_state_average[w] += phi_j;
      for (std::size_t s = 0; s < j_select.size(); ++s)
        if (j_select[s] == j) out.phi(w, static_cast<Index>(s)) = phi_j;
    }
    out.phi_state_average[w] /= static_cast<Real>(d);
  }
  return out;
}

namespace {

// sin^2((theta_j - theta_j') / 2) with the resonance guard applied first.
struct PairWeights {
  std::vector<Index> partner;
  std::vector<Real> coupling;   // |<E_j|dU|E_j'>|^2
  std::vector<Real> half_gap;   // (theta_j - theta_j') / 2
  std::vector<std::pair<Index, Index>> resonant;
};

PairWeights collect_pairs(const DeltaUMatrix& delta_u, Real tau, Index j) {
  const Index d = delta_u.energies.size();
  if (j < 0 || j >= d) throw std::invalid_argument("perturbative_fidelity: state out of range");
  PairWeights pw;
  for (Index jp = 0; jp < d; ++jp) {
    if (jp == j) continue;
    const Real dtheta = (delta_u.energies[j] - delta_u.energies[jp]) * tau;
    if (std::abs(std::polar(Real(1), dtheta) - Complex{1, 0}) < 1e-12) {
      pw.resonant.emplace_back(j, jp);
      continue;
    }
    pw.partner.push_back(jp);
    pw.coupling.push_back(std::norm(delta_u.matrix(j, jp)));
    pw.half_gap.push_back(0.5 * dtheta);
  }
  return pw;
}

}  // namespace

PerturbativeFidelity perturbative_fidelity(const DeltaUMatrix& delta_u, Real tau, Index j,
                                           long n_max) {
  const PairWeights pw = collect_pairs(delta_u, tau, j);
  PerturbativeFidelity out;
  out.resonant = pw.resonant;
  out.values.resize(static_cast<std::size_t>(n_max) + 1);
  out.values[0] = 1.0;

  const std::size_t pairs = pw.partner.size();
  std::vector<Real> inv_sin2(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const Real s = std::sin(pw.half_gap[i]);
    inv_sin2[i] = pw.coupling[i] / (s * s);
  }

  Real plateau_log = 0;
  for (std::size_t i = 0; i < pairs; ++i) plateau_log += 0.5 * inv_sin2[i];
  out.plateau = std::exp(-plateau_log);

  for (long n = 1; n <= n_max; ++n) {
    Real log_sum = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const Real osc = std::sin(pw.half_gap[i] * static_cast<Real>(n));
      log_sum += osc * osc * inv_sin2[i];
    }
    out.values[static_cast<std::size_t>(n)] = std::exp(-log_sum);
  }
  return out;
}

Real perturbative_plateau(const DeltaUMatrix& delta_u, Real tau, Index j) {
  const PairWeights pw = collect_pairs(delta_u, tau, j);
  Real acc = 0;
  for (std::size_t i = 0; i < pw.partner.size(); ++i) {
    const Real s = std::sin(pw.half_gap[i]);
    acc += 0.5 * pw.coupling[i] / (s * s);
  }
  return std::exp(-acc);
}

}  // namespace floq
