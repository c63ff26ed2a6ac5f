#include "floq/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace floq {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

Real parse_real(const std::string& token, const std::string& key) {
  std::size_t used = 0;
  Real value = 0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + token + "'");
  }
  if (used != token.size() || !std::isfinite(value))
    throw ConfigError("config: key '" + key + "' expects a number, got '" + token + "'");
  return value;
}

long parse_long(const std::string& token, const std::string& key) {
  const Real value = parse_real(token, key);
  const long rounded = std::lround(value);
  if (std::abs(value - static_cast<Real>(rounded)) > 1e-9)
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + token + "'");
  return rounded;
}

std::vector<std::string> split_array(const std::string& raw, const std::string& key) {
  std::string body = trim(raw);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']')
      throw ConfigError("config: key '" + key + "' has an unterminated array literal");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> items;
  std::stringstream stream(body);
  std::string piece;
  while (std::getline(stream, piece, ',')) {
    piece = trim(piece);
    if (!piece.empty()) items.push_back(piece);
  }
  return items;
}

std::vector<Real> parse_real_list(const std::string& raw, const std::string& key) {
  std::vector<Real> out;
  for (const std::string& item : split_array(raw, key)) out.push_back(parse_real(item, key));
  return out;
}

std::vector<long> parse_long_list(const std::string& raw, const std::string& key) {
  std::vector<long> out;
  for (const std::string& item : split_array(raw, key)) out.push_back(parse_long(item, key));
  return out;
}

std::string format_real(Real x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::string format_real_list(const std::vector<Real>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += format_real(xs[i]);
  }
  return out + "]";
}

std::string format_long_list(const std::vector<long>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out + "]";
}

}  // namespace

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "l") {
    config.sites = static_cast<int>(parse_long(value, key));
  } else if (key == "k") {
    config.order_k = static_cast<int>(parse_long(value, key));
  } else if (key == "J") {
    config.coupling_j = parse_real(value, key);
  } else if (key == "h") {
    config.field_h = parse_real(value, key);
  } else if (key == "g") {
    config.field_g = parse_real(value, key);
  } else if (key == "tau_grid") {
    config.tau_grid = parse_real_list(value, key);
  } else if (key == "sigma_grid") {
    config.sigma_grid = parse_real_list(value, key);
  } else if (key == "eps_grid") {
    config.eps_grid = parse_real_list(value, key);
  } else if (key == "j0_grid") {
    config.j0_grid = parse_long_list(value, key);
  } else if (key == "tau_window") {
    config.tau_window = parse_real_list(value, key);
  } else if (key == "n_max") {
    config.n_max = parse_long(value, key);
  } else if (key == "n_report") {
    config.n_report = parse_long(value, key);
  } else if (key == "delta_scale") {
    config.delta_scale = parse_real(value, key);
  } else if (key == "initial_state") {
    config.initial_state = trim(value);
  } else if (key == "out") {
    config.out_dir = trim(value);
  } else if (key == "workers") {
    config.workers = static_cast<int>(parse_long(value, key));
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(parse_long(value, key));
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void apply_config_text(RunConfig& config, const std::string& text) {
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(line_no) + " is missing a key or value");
    apply_override(config, key, value);
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  apply_config_text(config, text);
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void validate_config(const RunConfig& config) {
  if (config.sites < 2 || config.sites > 26)
    throw ConfigError("config: l must lie in [2, 26]");
  if (config.order_k != 0 && config.order_k != 1)
    throw ConfigError("config: k must be 0 or 1");
  if (config.tau_grid.empty()) throw ConfigError("config: tau_grid must be non-empty");
  for (Real tau : config.tau_grid)
    if (tau <= 0) throw ConfigError("config: every tau must be positive");
  if (config.sigma_grid.empty()) throw ConfigError("config: sigma_grid must be non-empty");
  for (Real sigma : config.sigma_grid)
    if (sigma <= 0) throw ConfigError("config: every sigma must be positive");
  for (Real eps : config.eps_grid)
    if (eps < 0) throw ConfigError("config: eps must be nonnegative");
  if (config.eps_grid.empty()) throw ConfigError("config: eps_grid must be non-empty");
  if (config.j0_grid.empty()) throw ConfigError("config: j0_grid must be non-empty");
  if (!config.tau_window.empty()) {
    if (config.tau_window.size() != 3)
      throw ConfigError("config: tau_window expects [lo, hi, count]");
    if (config.tau_window[0] <= 0 || config.tau_window[1] <= config.tau_window[0])
      throw ConfigError("config: tau_window bounds must satisfy 0 < lo < hi");
    if (config.tau_window[2] < 2 ||
        std::abs(config.tau_window[2] - std::round(config.tau_window[2])) > 1e-9)
      throw ConfigError("config: tau_window count must be an integer >= 2");
  }
  if (config.n_max < 0) throw ConfigError("config: n_max must be nonnegative");
  if (config.n_report < 1) throw ConfigError("config: n_report must be positive");
  if (config.delta_scale <= 0) throw ConfigError("config: delta_scale must be positive");
  if (config.workers < 1) throw ConfigError("config: workers must be at least 1");
  parse_initial_state(config);  // throws on a malformed selector
}

long resolved_n_max(const RunConfig& config) {
  if (config.n_max > 0) return config.n_max;
  Real sigma_max = 0;
  for (Real sigma : config.sigma_grid) sigma_max = std::max(sigma_max, sigma);
  return static_cast<long>(std::ceil(5.0 * sigma_max));
}

std::vector<Real> window_grid(const RunConfig& config) {
  std::vector<Real> taus;
  if (config.tau_window.empty()) return taus;
  const long count = std::lround(config.tau_window[2]);
  const Real lo = config.tau_window[0];
  const Real hi = config.tau_window[1];
  for (long i = 0; i < count; ++i)
    taus.push_back(lo + (hi - lo) * static_cast<Real>(i) / static_cast<Real>(count - 1));
  return taus;
}

InitialStateSpec parse_initial_state(const RunConfig& config) {
  InitialStateSpec spec;
  const std::string& s = config.initial_state;
  if (s == "ground") {
    spec.kind = InitialStateSpec::Kind::ground;
  } else if (s.rfind("eigenstate:", 0) == 0) {
    spec.kind = InitialStateSpec::Kind::eigenstate;
    spec.eigen_index = parse_long(s.substr(11), "initial_state");
    if (spec.eigen_index < 0) throw ConfigError("config: eigenstate index must be nonnegative");
  } else if (s.rfind("snapshot:", 0) == 0) {
    spec.kind = InitialStateSpec::Kind::snapshot;
    spec.path = s.substr(9);
    if (spec.path.empty()) throw ConfigError("config: snapshot selector needs a path");
  } else {
    throw ConfigError("config: initial_state must be ground, eigenstate:<j>, or snapshot:<path>");
  }
  return spec;
}

std::string config_summary(const RunConfig& config) {
  std::string out;
  out += "l = " + std::to_string(config.sites) + "\n";
  out += "k = " + std::to_string(config.order_k) + "\n";
  out += "J = " + format_real(config.coupling_j) + "\n";
  out += "h = " + format_real(config.field_h) + "\n";
  out += "g = " + format_real(config.field_g) + "\n";
  out += "tau_grid = " + format_real_list(config.tau_grid) + "\n";
  out += "sigma_grid = " + format_real_list(config.sigma_grid) + "\n";
  out += "eps_grid = " + format_real_list(config.eps_grid) + "\n";
  out += "j0_grid = " + format_long_list(config.j0_grid) + "\n";
  out += "tau_window = " + format_real_list(config.tau_window) + "\n";
  out += "n_max = " + std::to_string(config.n_max) + "\n";
  out += "n_report = " + std::to_string(config.n_report) + "\n";
  out += "delta_scale = " + format_real(config.delta_scale) + "\n";
  out += "initial_state = " + config.initial_state + "\n";
  out += "workers = " + std::to_string(config.workers) + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& config, const std::string& command) {
  const std::string payload =
      command + "\n" + kVersionString + "\n" + config_summary(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

ModelParams model_at(const RunConfig& config, Real tau) {
  ModelParams p;
  p.sites = config.sites;
  p.coupling_j = config.coupling_j;
  p.field_h = config.field_h;
  p.field_g = config.field_g;
  p.tau = tau;
  return p;
}

}  // namespace floq
