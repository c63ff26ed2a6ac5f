#pragma once

// Run configuration for the command-line driver: a flat key-value file with
// array literals, deterministic canonicalization, and a stable 64-bit hash
// that ties checkpointed sweep points to the exact configuration (and code
// version) that produced them.

#include "floq/pauli.hpp"
#include "floq/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace floq {

inline constexpr const char* kVersionString = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int sites = 10;
  int order_k = 1;
  Real coupling_j = 1.0;
  Real field_h = 1.0;
  Real field_g = 1.0;
  std::vector<Real> tau_grid = {0.5};
  std::vector<Real> sigma_grid = {1000.0};
  std::vector<Real> eps_grid = {0.1, 0.3, 0.5, 0.75};
  std::vector<long> j0_grid = {0, -1};  // -1 picks the eigenstate closest to zero energy
  std::vector<Real> tau_window;         // linspace triple [lo, hi, count]; empty = unused
  long n_max = 0;                       // 0 = auto: ceil(5 * max sigma)
  long n_report = 1000;                 // trace length for per-cycle outputs
  Real delta_scale = 0.035;             // Gaussian width Delta = delta_scale * L
  std::string initial_state = "ground";  // ground | eigenstate:<j> | snapshot:<path>
  std::string out_dir = "out";
  int workers = 1;
  std::uint64_t seed = 0x5eedULL;
};

/// Applies the flat key = value format on top of `config`.  '#' starts a
/// comment, blank lines are skipped, arrays are bracketed comma lists.
/// Unknown keys throw ConfigError.  Keys absent from the text keep whatever
/// `config` already holds, so command-specific defaults survive file loading.
void apply_config_text(RunConfig& config, const std::string& text);

/// apply_config_text starting from the built-in defaults.
RunConfig parse_config_text(const std::string& text);

RunConfig load_config_file(const std::string& path);

/// Applies one key = value override (the CLI flags funnel through here so a
/// flag and a file line cannot diverge in meaning).
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// Structural sanity independent of any particular subcommand.  Throws.
void validate_config(const RunConfig& config);

/// Trace length for averaged-fidelity runs: explicit n_max, or ceil(5 sigma_max).
long resolved_n_max(const RunConfig& config);

/// The tau points of the fine-window mode: linspace over the stored triple.
std::vector<Real> window_grid(const RunConfig& config);

struct InitialStateSpec {
  enum class Kind { ground, eigenstate, snapshot } kind = Kind::ground;
  long eigen_index = 0;
  std::string path;
};

InitialStateSpec parse_initial_state(const RunConfig& config);

/// Canonical key = value rendering (fixed key order, %.17g reals).  This text
/// is what gets hashed, and it heads every emitted CSV.
std::string config_summary(const RunConfig& config);

/// FNV-1a 64-bit over command, code version, and the canonical summary.
std::uint64_t config_hash(const RunConfig& config, const std::string& command);

/// ModelParams view at one grid point.
ModelParams model_at(const RunConfig& config, Real tau);

}  // namespace floq
