#pragma once

// Checkpointed grid sweeps for the command-line driver.
//
// Every grid point is computed independently and written atomically to its
// own file under <out>/points, tagged with the config hash.  A resumed run
// reuses any tagged point file that matches the hash, refuses to touch a
// directory written under a different hash, and finally assembles the point
// files, in grid order, into one deterministic CSV (no timestamps, %.17g
// floats), so an interrupted-and-resumed sweep is byte-identical to an
// uninterrupted one.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace floq {

struct SweepPlan {
  std::string command;   // subcommand name; used for file naming
  std::string out_dir;
  std::uint64_t hash = 0;
  int workers = 1;
  bool resume = false;
  long abort_after = -1;  // stop (exit 75) after this many fresh points; -1 = never
};

/// Computes the CSV rows of grid point i (newline-terminated lines).  Lines
/// starting with '#' are allowed and survive assembly next to the rows.
using PointFunction = std::function<std::string(std::size_t)>;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitPartialFailure = 3;
inline constexpr int kExitAborted = 75;

/// Runs the sweep and assembles <out>/<command>.csv.  `header` is the
/// column-name line (without '#'), `metadata` the commented preamble lines
/// (without '#'; version/command/hash lines are added automatically).
/// Returns one of the kExit codes.  Point failures are reported on stderr,
/// the surviving points are still assembled, and the exit code is 3.
int run_sweep(const SweepPlan& plan, std::size_t n_points, const PointFunction& point,
              const std::string& header, const std::vector<std::string>& metadata);

}  // namespace floq
