// floqsim: command-line driver for the kicked-chain benchmarks.
//
// Every subcommand reads one RunConfig (file first, flags override), maps a
// grid to independent points, and hands them to run_sweep, which owns
// checkpointing, the worker pool, and CSV assembly.  All numeric output is
// %.17g so reruns under an unchanged config are byte-identical.

#include "floq/config.hpp"
#include "floq/fgr.hpp"
#include "floq/fidelity.hpp"
#include "floq/pauli.hpp"
#include "floq/sector.hpp"
#include "floq/spectral.hpp"
#include "floq/state.hpp"
#include "floq/sweep.hpp"
#include "floq/types.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace floq;

std::string fmt(Real x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += fields[i];
  }
  row += '\n';
  return row;
}

std::vector<std::string> summary_lines(const RunConfig& config) {
  std::vector<std::string> lines;
  std::stringstream stream(config_summary(config));
  std::string line;
  while (std::getline(stream, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

/// j0 selector: a nonnegative index passes through, -1 picks the eigenstate
/// closest to zero energy (the middle of the spectrum for these models).
Index resolve_state(const VectorXd& energies, long raw) {
  if (raw >= 0) return static_cast<Index>(raw);
  Index best = 0;
  for (Index j = 1; j < energies.size(); ++j)
    if (std::abs(energies(j)) < std::abs(energies(best))) best = j;
  return best;
}

void check_j0_grid(const RunConfig& config, Index dim) {
  for (long raw : config.j0_grid) {
    if (raw < -1) throw ConfigError("config: j0 entries must be >= -1");
    if (raw >= static_cast<long>(dim))
      throw ConfigError("config: j0 = " + std::to_string(raw) + " exceeds the sector dimension " +
                        std::to_string(dim));
  }
}

void check_state_memory(const RunConfig& config) {
  // full-space evolutions hold about three 2^L complex vectors per worker
  const double bytes =
      static_cast<double>(config.workers) * 3.0 * std::ldexp(16.0, config.sites);
  if (bytes > 4.5e9)
    throw ConfigError("config: workers * state memory exceeds 4.5 GB; lower workers or l");
}

/// |<psi0| U^n |psi0>|^2 for n = 0..n_max with a dense sector unitary.
std::vector<Real> unitary_power_fidelity(const MatrixXcd& u, const VectorXd& start, long n_max) {
  const VectorXcd reference = start.cast<Complex>();
  VectorXcd psi = reference;
  std::vector<Real> values(static_cast<std::size_t>(n_max) + 1);
  values[0] = 1.0;
  for (long n = 1; n <= n_max; ++n) {
    psi = u * psi;
    values[static_cast<std::size_t>(n)] = std::norm(reference.dot(psi));
  }
  return values;
}

int run_fidelity_sweep(const RunConfig& config, const SweepPlan& plan) {
  const InitialStateSpec spec = parse_initial_state(config);
  check_state_memory(config);
  if (spec.kind == InitialStateSpec::Kind::eigenstate && config.sites > 16)
    throw ConfigError("fidelity-sweep: the eigenstate selector needs l <= 16");

  const SectorBasis basis = SectorBasis::build(config.sites);
  if (spec.kind == InitialStateSpec::Kind::eigenstate && spec.eigen_index >= basis.dim())
    throw ConfigError("fidelity-sweep: eigenstate index exceeds the sector dimension");

  StateVector snapshot;
  if (spec.kind == InitialStateSpec::Kind::snapshot) {
    snapshot = read_snapshot(spec.path);
    if (snapshot.sites != config.sites)
      throw ConfigError("fidelity-sweep: snapshot was written for l = " +
                        std::to_string(snapshot.sites));
  }

  const long n_max = resolved_n_max(config);
  for (Real sigma : config.sigma_grid)
    if (static_cast<Real>(n_max) < 5.0 * sigma)
      throw ConfigError("config: n_max must reach 5 * sigma for every sigma in the grid");

  auto point = [&](std::size_t i) -> std::string {
    const Real tau = config.tau_grid[i];
    const ModelParams p = model_at(config, tau);
    StateVector psi;
    switch (spec.kind) {
      case InitialStateSpec::Kind::ground: {
        LanczosOptions opts;
        opts.seed = config.seed;
        const EigenPair gs = lanczos_ground_state(magnus_truncation(p, config.order_k), basis, opts);
        psi = StateVector{config.sites, basis.lift(gs.vector)};
        break;
      }
      case InitialStateSpec::Kind::eigenstate: {
        const SectorEigensystem h =
            dense_sector_eigensystem(magnus_truncation(p, config.order_k), basis);
        const VectorXd column = h.vectors.col(spec.eigen_index);
        psi = StateVector{config.sites, basis.lift(column)};
        break;
      }
      case InitialStateSpec::Kind::snapshot:
        psi = snapshot;
        break;
    }
    const FidelityTrace trace = FloquetStepPlan(p).evolve_fidelity(psi, n_max);
    std::string rows;
    for (Real sigma : config.sigma_grid) {
      const AveragedFidelity avg = time_averaged_fidelity(trace, sigma);
      rows += join_row({std::to_string(config.sites), std::to_string(config.order_k), fmt(tau),
                        fmt(sigma), fmt(avg.fbar), fmt(avg.rate)});
    }
    return rows;
  };

  return run_sweep(plan, config.tau_grid.size(), point, "L,k,tau,sigma,fbar,s",
                   summary_lines(config));
}

int run_eigenstate_scan(const RunConfig& config, const SweepPlan& plan) {
  if (config.sites > 16) throw ConfigError("eigenstate-scan: full spectra need l <= 16");
  const SectorBasis basis = SectorBasis::build(config.sites);

  auto point = [&](std::size_t i) -> std::string {
    const Real tau = config.tau_grid[i];
    const ModelParams p = model_at(config, tau);
    const SectorEigensystem h =
        dense_sector_eigensystem(magnus_truncation(p, config.order_k), basis);
    const FloquetEigensystem sys =
        floquet_eigensystem(SectorFloquetBuilder(p, basis).unitary(tau), tau);
    const MatrixXcd mix = sys.vectors.adjoint() * h.vectors.cast<Complex>();
    const char* note = sys.degenerate ? "degenerate" : "ok";
    std::string rows;
    for (Index j = 0; j < h.energies.size(); ++j) {
      const Real fbar = mix.col(j).cwiseAbs2().squaredNorm();
      rows += join_row({std::to_string(config.sites), fmt(tau), std::to_string(j),
                        fmt(h.energies(j)), fmt(rate_from_fidelity(fbar, config.sites)), note});
    }
    return rows;
  };

  return run_sweep(plan, config.tau_grid.size(), point, "L,tau,j,energy,s_inf,note",
                   summary_lines(config));
}

int run_quasienergy_map(const RunConfig& config, const SweepPlan& plan) {
  if (config.sites > 16) throw ConfigError("quasienergy-map: full spectra need l <= 16");
  const SectorBasis basis = SectorBasis::build(config.sites);
  const std::vector<Real> taus =
      config.tau_window.empty() ? config.tau_grid : window_grid(config);

  auto point = [&](std::size_t i) -> std::string {
    const Real tau = taus[i];
    const ModelParams p = model_at(config, tau);
    const PauliOperator heff = magnus_truncation(p, config.order_k);
    const FloquetEigensystem sys =
        floquet_eigensystem(SectorFloquetBuilder(p, basis).unitary(tau), tau);
    LanczosOptions opts;
    opts.seed = config.seed;
    const EigenPair gs = lanczos_ground_state(heff, basis, opts);
    const VectorXcd amplitudes = column_overlaps(sys.vectors, gs.vector);
    const VectorXd mz = basis.diagonal(build_mz(config.sites));
    const std::vector<CompiledRealTerm> terms = basis.compile_real(heff);
    const Index d = sys.quasienergies.size();
    VectorXd real_part(d), imag_part(d), h_real(d), h_imag(d);
    std::string rows;
    for (Index a = 0; a < d; ++a) {
      real_part = sys.vectors.col(a).real();
      imag_part = sys.vectors.col(a).imag();
      basis.apply(terms, real_part, h_real);
      basis.apply(terms, imag_part, h_imag);
      const Real energy = real_part.dot(h_real) + imag_part.dot(h_imag);
      const Real defect = std::remainder(sys.quasienergies(a) - energy * tau, 2.0 * kPi);
      const Real mz_a = sys.vectors.col(a).cwiseAbs2().dot(mz);
      const Real weight = std::max(std::norm(amplitudes(a)), 1e-30);
      rows += join_row({fmt(tau), std::to_string(a), fmt(sys.quasienergies(a)), fmt(mz_a),
                        fmt(std::log10(weight)), fmt(defect)});
    }
    return rows;
  };

  return run_sweep(plan, taus.size(), point, "tau,alpha,theta,mz,log10_overlap,fold_defect",
                   summary_lines(config));
}

int run_fgr_compare(const RunConfig& config, const SweepPlan& plan) {
  if (config.sites > 14) throw ConfigError("fgr-compare: the dense golden-rule route needs l <= 14");
  const SectorBasis basis = SectorBasis::build(config.sites);
  check_j0_grid(config, basis.dim());
  const std::size_t n_tau = config.tau_grid.size();

  auto point = [&](std::size_t i) -> std::string {
    const Real eps = config.eps_grid[i / n_tau];
    const Real tau = config.tau_grid[i % n_tau];
    const ModelParams p = model_at(config, tau);
    const FgrModel model = fgr_rates(p, eps, basis, config.delta_scale * config.sites);
    const MatrixXcd u = SectorDeformedBuilder(p, eps, basis).unitary(tau);
    std::string rows = "# comb eps=" + fmt(eps) + " tau=" + fmt(tau) + " delta=" +
                       fmt(model.delta) + " omega=" + fmt(model.omega) +
                       " harmonics=" + std::to_string(model.harmonics) + "\n";
    for (long raw : config.j0_grid) {
      const Index j = resolve_state(model.energies, raw);
      const FidelityTrace golden = fgr_fidelity_trace(model, j, config.n_report);
      const VectorXd start = model.eigenvectors.col(j);
      const std::vector<Real> exact = unitary_power_fidelity(u, start, config.n_report);
      for (long n = 0; n <= config.n_report; ++n) {
        const std::size_t s = static_cast<std::size_t>(n);
        rows += join_row({std::to_string(config.sites), fmt(eps), fmt(tau), std::to_string(j),
                          std::to_string(n), fmt(exact[s]), fmt(golden.values[s])});
      }
    }
    return rows;
  };

  return run_sweep(plan, config.eps_grid.size() * n_tau, point, "L,eps,tau,j,n,f_exact,f_fgr",
                   summary_lines(config));
}

int run_spectral_function(const RunConfig& config, const SweepPlan& plan) {
  if (config.sites > 14) throw ConfigError("spectral-function: the dense route needs l <= 14");
  const SectorBasis basis = SectorBasis::build(config.sites);

  // H0 and K carry no tau dependence, so the whole command is one grid point
  auto point = [&](std::size_t) -> std::string {
    const ModelParams p = model_at(config, config.tau_grid.front());
    const SectorEigensystem h0 = dense_sector_eigensystem(build_h0(p), basis);
    const MatrixXd k_sector = basis.project_real(build_drive(p));
    const SpectralFunction sf =
        spectral_function(h0, k_sector, {0}, config.delta_scale * config.sites);
    std::string rows;
    for (Index i = 0; i < sf.omegas.size(); ++i)
      rows += join_row({fmt(sf.omegas(i)), fmt(sf.phi(i, 0)), fmt(sf.phi_state_average(i))});
    return rows;
  };

  return run_sweep(plan, 1, point, "omega,phi_ground,phi_average", summary_lines(config));
}

int run_pert_fidelity(const RunConfig& config, const SweepPlan& plan) {
  if (config.sites > 14) throw ConfigError("pert-fidelity: the defect unitary needs l <= 14");
  check_state_memory(config);
  const SectorBasis basis = SectorBasis::build(config.sites);
  check_j0_grid(config, basis.dim());

  auto point = [&](std::size_t i) -> std::string {
    const Real tau = config.tau_grid[i];
    const ModelParams p = model_at(config, tau);
    const DeltaUMatrix du = delta_u_matrix(p, config.order_k, basis);
    const SectorEigensystem hf =
        dense_sector_eigensystem(magnus_truncation(p, config.order_k), basis);
    const FloquetStepPlan step(p);
    std::string rows;
    for (long raw : config.j0_grid) {
      const Index j = resolve_state(du.energies, raw);
      const PerturbativeFidelity pert =
          perturbative_fidelity(du, tau, j, config.n_report);
      for (const std::pair<Index, Index>& pair : pert.resonant)
        rows += "# resonant tau=" + fmt(tau) + " j=" + std::to_string(pair.first) +
                " partner=" + std::to_string(pair.second) + "\n";
      const VectorXd column = hf.vectors.col(j);
      const StateVector psi{config.sites, basis.lift(column)};
      const FidelityTrace exact = step.evolve_fidelity(psi, config.n_report);
      for (long n = 0; n <= config.n_report; ++n) {
        const std::size_t s = static_cast<std::size_t>(n);
        rows += join_row({std::to_string(config.sites), std::to_string(config.order_k), fmt(tau),
                          std::to_string(j), std::to_string(n), fmt(exact.values[s]),
                          fmt(pert.values[s])});
      }
    }
    return rows;
  };

  return run_sweep(plan, config.tau_grid.size(), point, "L,k,tau,j,n,f_exact,f_pert",
                   summary_lines(config));
}

int run_selftest() {
  int failures = 0;
  const auto report = [&failures](const char* name, bool ok) {
    std::printf("%s  %s\n", ok ? "ok  " : "FAIL", name);
    if (!ok) ++failures;
  };

  {
    const GaussianWindow window(40.0);
    const Real two_pi = 2.0 * kPi;
    const bool ok = std::abs(window(0.0) - 1.0) < 1e-12 &&
                    std::abs(window(two_pi) - 1.0) < 1e-9 &&
                    std::abs(window(0.37) - window(0.37 + two_pi)) < 1e-12;
    report("gaussian window comb normalization and periodicity", ok);
  }

  {
    FgrModel model;
    model.energies = VectorXd::Zero(2);
    model.rates = MatrixXd::Zero(2, 2);
    model.rates(0, 1) = model.rates(1, 0) = 0.7;
    VectorXd times(3);
    times << 0.0, 0.4, 1.3;
    const MasterTrajectory run = evolve_master(model, 0, times);
    bool ok = true;
    for (Index t = 0; t < times.size(); ++t) {
      const Real expected = 0.5 * (1.0 + std::exp(-1.4 * times(t)));
      ok = ok && std::abs(run.probabilities(t, 0) - expected) < 1e-6;
    }
    report("two-level master equation against the closed form", ok);
  }

  {
    ModelParams p;
    p.sites = 6;
    p.tau = 0.7;
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<Real> gauss;
    StateVector psi;
    psi.sites = p.sites;
    psi.amps = VectorXcd(1 << p.sites);
    for (Index i = 0; i < psi.amps.size(); ++i) psi.amps(i) = Complex(gauss(rng), gauss(rng));
    psi.amps.normalize();
    const FloquetStepPlan step(p);
    for (int n = 0; n < 200; ++n) step.apply(psi);
    report("cycle kernel preserves the norm over 200 steps",
           std::abs(psi.amps.norm() - 1.0) < 1e-10);
  }

  {
    ModelParams p;
    p.sites = 6;
    p.tau = 0.7;
    const SectorBasis basis = SectorBasis::build(p.sites);
    std::mt19937_64 rng(0xfeedULL);
    std::normal_distribution<Real> gauss;
    VectorXd v(basis.dim());
    for (Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    v.normalize();
    const VectorXcd sector_next = SectorFloquetBuilder(p, basis).unitary(p.tau) * v.cast<Complex>();
    StateVector full{p.sites, basis.lift(v)};
    FloquetStepPlan(p).apply(full);
    report("sector unitary agrees with the full-space cycle",
           (full.amps - basis.lift(sector_next)).norm() < 1e-10);
  }

  {
    DeltaUMatrix du;
    du.energies = VectorXd(3);
    du.energies << 0.0, 0.7, 1.6;
    du.matrix = MatrixXcd::Zero(3, 3);
    du.matrix(0, 1) = Complex(0.02, 0.01);
    du.matrix(1, 0) = std::conj(du.matrix(0, 1));
    du.matrix(0, 2) = Complex(-0.005, 0.03);
    du.matrix(2, 0) = std::conj(du.matrix(0, 2));
    const PerturbativeFidelity pert = perturbative_fidelity(du, 0.9, 0, 50);
    const Real direct = perturbative_plateau(du, 0.9, 0);
    report("perturbative plateau matches its direct evaluation",
           std::abs(pert.plateau - direct) < 1e-12);
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"floqsim: stroboscopic benchmarks for the kicked chain"};
  app.require_subcommand(1);

  std::string flag_config, flag_out, flag_workers, flag_sites, flag_order, flag_tau, flag_sigma;
  bool flag_resume = false;
  long flag_abort = -1;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"fidelity-sweep", "Time-averaged fidelity of the initial state over the (tau, sigma) grid"},
      {"eigenstate-scan", "Infinite-time fidelity rate for every effective eigenstate"},
      {"quasienergy-map", "Floquet spectrum vs tau with magnetization and overlap channels"},
      {"fgr-compare", "Exact vs golden-rule fidelity traces over the (eps, tau) grid"},
      {"spectral-function", "Drive spectral function in the mean-Hamiltonian eigenbasis"},
      {"pert-fidelity", "Exact vs perturbative fidelity for effective eigenstates"},
      {"selftest", "Fast internal consistency checks"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    if (std::string(name) == "selftest") continue;
    sub->add_option("--config", flag_config, "Key = value configuration file");
    sub->add_option("--out", flag_out, "Output directory");
    sub->add_option("--workers", flag_workers, "Worker threads over grid points");
    sub->add_flag("--resume", flag_resume, "Reuse checkpoints with a matching config hash");
    sub->add_option("--l", flag_sites, "Chain length override");
    sub->add_option("--k", flag_order, "Truncation order override (0 or 1)");
    sub->add_option("--tau-grid", flag_tau, "tau grid override, e.g. [0.2,0.4,0.8]");
    sub->add_option("--sigma-grid", flag_sigma, "sigma grid override");
    sub->add_option("--abort-after", flag_abort, "")->group("");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : floq::kExitConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (command == "selftest") return run_selftest();

  try {
    floq::RunConfig config;
    if (command == "eigenstate-scan") config.tau_grid = {0.5, 1.2};
    if (command == "quasienergy-map") config.tau_window = {0.05, 1.6, 32.0};
    if (sub->count("--config")) {
      std::ifstream in(flag_config);
      if (!in) throw floq::ConfigError("config: cannot open '" + flag_config + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      floq::apply_config_text(config, buffer.str());
    }
    if (sub->count("--l")) floq::apply_override(config, "l", flag_sites);
    if (sub->count("--k")) floq::apply_override(config, "k", flag_order);
    if (sub->count("--tau-grid")) floq::apply_override(config, "tau_grid", flag_tau);
    if (sub->count("--sigma-grid")) floq::apply_override(config, "sigma_grid", flag_sigma);
    if (sub->count("--out")) floq::apply_override(config, "out", flag_out);
    if (sub->count("--workers")) floq::apply_override(config, "workers", flag_workers);
    floq::validate_config(config);

    floq::SweepPlan plan;
    plan.command = command;
    plan.out_dir = config.out_dir;
    plan.hash = floq::config_hash(config, command);
    plan.workers = config.workers;
    plan.resume = flag_resume;
    plan.abort_after = sub->count("--abort-after") ? flag_abort : -1;

    if (command == "fidelity-sweep") return run_fidelity_sweep(config, plan);
    if (command == "eigenstate-scan") return run_eigenstate_scan(config, plan);
    if (command == "quasienergy-map") return run_quasienergy_map(config, plan);
    if (command == "fgr-compare") return run_fgr_compare(config, plan);
    if (command == "spectral-function") return run_spectral_function(config, plan);
    if (command == "pert-fidelity") return run_pert_fidelity(config, plan);
    throw floq::ConfigError("unknown subcommand '" + command + "'");
  } catch (const floq::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return floq::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "floqsim: %s\n", e.what());
    return floq::kExitConfigError;
  }
}
