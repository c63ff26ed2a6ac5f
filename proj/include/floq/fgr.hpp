#pragma once

// Golden-rule kinetics for the deformed drive, plus the defect-unitary
// perturbation theory for the fidelity.
//
// The drive toggles H0 +- eps K with period T = 2 tau, so transitions between
// eigenstates of H0 absorb integer multiples of Omega = pi/tau.  The master
// equation moves populations P_j with rates
//   w_{j->j'} = (2 pi / T^2) |<E_j'|U|E_j>|^2 sum_l g_Delta(E_j' - E_j - l Omega),
// where g_Delta is a normalized Gaussian standing in for the delta function
// and the l-sum stops once |l Omega| clears the spectral span plus 6 Delta.

#include "floq/pauli.hpp"
#include "floq/sector.hpp"
#include "floq/spectral.hpp"
#include "floq/state.hpp"
#include "floq/types.hpp"

#include <utility>
#include <vector>

namespace floq {

struct FgrModel {
  Real tau = 0;
  Real epsilon = 0;
  Real delta = 0;     // Gaussian regularization width
  Real omega = 0;     // pi / tau
  Real period = 0;    // 2 tau
  int harmonics = 0;  // l-sum truncated at |l| <= harmonics
  VectorXd energies;  // H0 eigenvalues, ascending, sector coordinates
  MatrixXd eigenvectors;
  MatrixXd rates;  // rates(j, j') = w_{j -> j'}; zero diagonal
};

/// Builds the rate matrix from the dense deformed cycle in the symmetry
/// sector.  delta defaults to 0.035 L when not given.  Guarded to L <= 14.
FgrModel fgr_rates(const ModelParams& p, Real epsilon, const SectorBasis& basis,
                   Real delta = -1.0);

struct MasterTrajectory {
  VectorXd times;
  MatrixXd probabilities;  // row per time, column per eigenstate
};

/// Integrates dP_j/dt = sum_j' [w_{j'->j} P_j' - w_{j->j'} P_j] from
/// P_j(0) = delta_{j,j0} through the requested times (ascending, first >= 0).
/// Adaptive embedded Runge-Kutta; a step is rejected both on truncation error
/// and on leaving the probability simplex.  Throws on step-size collapse.
MasterTrajectory evolve_master(const FgrModel& model, Index j0, const VectorXd& times);

/// F(n) = [P_{j0}(n tau)]^2 for n = 0..n_max.
FidelityTrace fgr_fidelity_trace(const FgrModel& model, Index j0, long n_max);

struct SpectralFunction {
  VectorXd omegas;
  std::vector<Index> states;
  MatrixXd phi;        // column s: phi_{states[s]}(omega)
  VectorXd phi_state_average;
};

/// Gaussian-broadened phi_j(omega) = sum_j' |<E_j'|K|E_j>|^2 g_Delta(E_j' - E_j - omega)
/// for the selected j, plus the all-state average, on a uniform grid of
/// spacing delta/10 covering every transition energy plus 6 delta of margin.
SpectralFunction spectral_function(const SectorEigensystem& h0, const MatrixXd& k_sector,
                                   const std::vector<Index>& j_select, Real delta);

struct PerturbativeFidelity {
  std::vector<Real> values;  // F~(n) for n = 0..n_max
  Real plateau = 1;          // long-time average F~inf
  std::vector<std::pair<Index, Index>> resonant;  // excluded pairs
};

/// Leading-order fidelity from the defect-unitary matrix elements:
///   -ln F~_j(n) = sum_{j'!=j} sin^2(dtheta n/2)/sin^2(dtheta/2) |<E_j|dU|E_j'>|^2,
/// dtheta = (E_j - E_j') tau unfolded.  Pairs with e^{i dtheta} within 1e-12
/// of one are excluded from the sum and reported in `resonant`.
PerturbativeFidelity perturbative_fidelity(const DeltaUMatrix& delta_u, Real tau, Index j,
                                           long n_max);

/// The long-time average -ln F~inf = (1/2) sum |dU|^2 / sin^2(dtheta/2),
/// evaluated directly (cross-check for PerturbativeFidelity::plateau).
Real perturbative_plateau(const DeltaUMatrix& delta_u, Real tau, Index j);

}  // namespace floq
