#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "choquard/params.hpp"
#include "choquard/solver.hpp"
#include "choquard/spectra.hpp"

namespace choquard {

/// Values of the configuration language: a TOML subset with [tables], key = value lines,
/// numbers, booleans, "strings", flat arrays and # comments.
struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>> v;
  int line = 0;
};

using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigDocument {
  std::map<std::string, ConfigTable> tables;  // "" holds keys before the first header
  std::map<std::string, int> header_lines;
};

/// Throws ConfigError carrying the offending line.
ConfigDocument parse_config(const std::string& text);
ConfigDocument load_config_file(const std::string& path);

struct RunConfig {
  ProblemParams params;
  std::optional<double> beta_ratio;  // beta = ratio * beta_1(Omega) when set
  Potential potential;

  int n = 32;
  double half_width = 2.0;
  int radial_intervals = 20000;

  SolverOptions solver;
  EigenOptions eig;
  int eig_count = 5;
  double degeneracy_margin = 1e-6;  // times beta_1

  std::string output = "out";
  std::uint64_t seed = 12345;
  std::optional<double> init_eps;  // default: well radius / 4
  std::vector<double> lambdas{1e2, 1e3, 1e4};
  std::vector<double> beta_ratios{0.3, 0.1, 0.03};
  std::vector<double> eps_list{0.1, 0.05, 0.025};
  double delta = 1.0;
  int multistart_seeds = 8;
  bool snapshots = true;

  /// Cross-field checks (grid covers the well, ratios in range, ...).
  void validate() const;
};

/// Applies a parsed document on top of `base`; unknown tables or keys and type mismatches are errors.
RunConfig apply_config(const ConfigDocument& doc, RunConfig base = {});

/// Canonical text of every field (fixed order, shortest round-trip numbers).
std::string canonical_text(const RunConfig& c);
/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace choquard
