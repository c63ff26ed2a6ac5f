#include "floq/sweep.hpp"

#include "floq/config.hpp"
#include "floq/types.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace floq {

namespace fs = std::filesystem;

namespace {

std::string point_path(const SweepPlan& plan, std::size_t index) {
  return plan.out_dir + "/points/" + plan.command + ".p" + std::to_string(index) + ".csv";
}

std::string point_tag(const SweepPlan& plan, std::size_t index) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(plan.hash));
  return "# point=" + std::to_string(index) + " config=" + buffer;
}

/// First line of an existing point file, empty if unreadable.
std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

bool write_point_atomically(const std::string& path, const std::string& tag,
                            const std::string& rows) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << tag << "\n" << rows;
    if (!out.flush()) return false;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  return !ec;
}

}  // namespace

int run_sweep(const SweepPlan& plan, std::size_t n_points, const PointFunction& point,
              const std::string& header, const std::vector<std::string>& metadata) {
  std::error_code ec;
  fs::create_directories(plan.out_dir + "/points", ec);
  if (ec) {
    std::fprintf(stderr, "sweep: cannot create '%s/points': %s\n", plan.out_dir.c_str(),
                 ec.message().c_str());
    return kExitConfigError;
  }

  // triage: reusable checkpoints vs work still owed
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n_points; ++i) {
    const std::string path = point_path(plan, i);
    if (fs::exists(path)) {
      const std::string line = first_line(path);
      if (plan.resume && line == point_tag(plan, i)) continue;  // completed earlier
      if (plan.resume) {
        std::fprintf(stderr,
                     "sweep: refusing to resume: '%s' was written under a different "
                     "configuration\n",
                     path.c_str());
        return kExitConfigError;
      }
    } else if (fs::exists(path + ".tmp")) {
      fs::remove(path + ".tmp", ec);  // half-written leftover of a killed run
    }
    pending.push_back(i);
  }

  // each worker owns its points end to end; kernels share the remaining cores
  const int workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(n_points)));
  const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
  set_kernel_threads(std::max(1, static_cast<int>(hardware) / workers));

  std::atomic<std::size_t> cursor{0};
  std::atomic<long> fresh_done{0};
  std::atomic<bool> stop{false};
  std::atomic<int> failures{0};
  std::mutex log_mutex;

  auto work = [&]() {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t slot = cursor.fetch_add(1, std::memory_order_relaxed);
      if (slot >= pending.size()) return;
      const std::size_t index = pending[slot];
      std::string rows;
      try {
        rows = point(index);
      } catch (const std::exception& error) {
        failures.fetch_add(1, std::memory_order_relaxed);
        const std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "sweep: point %zu failed: %s\n", index, error.what());
        continue;
      }
      if (!write_point_atomically(point_path(plan, index), point_tag(plan, index), rows)) {
        failures.fetch_add(1, std::memory_order_relaxed);
        const std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "sweep: point %zu could not be written\n", index);
        continue;
      }
      const long done = fresh_done.fetch_add(1, std::memory_order_relaxed) + 1;
      if (plan.abort_after >= 0 && done >= plan.abort_after)
        stop.store(true, std::memory_order_relaxed);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  if (plan.abort_after >= 0 && stop.load()) return kExitAborted;

  // deterministic assembly in grid order
  std::ostringstream csv;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(plan.hash));
  csv << "# version = " << kVersionString << "\n";
  csv << "# command = " << plan.command << "\n";
  csv << "# config_hash = " << hash_hex << "\n";
  csv << "# grid_points = " << n_points << "\n";
  for (const std::string& line : metadata) csv << "# " << line << "\n";
  csv << header << "\n";

  std::size_t missing = 0;
  for (std::size_t i = 0; i < n_points; ++i) {
    std::ifstream in(point_path(plan, i), std::ios::binary);
    if (!in) {
      ++missing;
      continue;
    }
    std::string line;
    std::getline(in, line);  // the point tag stays in the point file only
    while (std::getline(in, line)) csv << line << "\n";
  }

  const std::string final_path = plan.out_dir + "/" + plan.command + ".csv";
  {
    std::ofstream out(final_path + ".tmp", std::ios::binary | std::ios::trunc);
    out << csv.str();
    if (!out.flush()) {
      std::fprintf(stderr, "sweep: cannot write '%s'\n", final_path.c_str());
      return kExitPartialFailure;
    }
  }
  fs::rename(final_path + ".tmp", final_path, ec);
  if (ec) {
    std::fprintf(stderr, "sweep: cannot finalize '%s'\n", final_path.c_str());
    return kExitPartialFailure;
  }

  return (failures.load() > 0 || missing > 0) ? kExitPartialFailure : kExitOk;
}

}  // namespace floq
