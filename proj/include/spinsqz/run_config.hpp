#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinsqz {

/// One run. Energies in units of J, hbar = k_B = 1, times in 1/J.
struct RunConfig {
  // model
  std::string family = "nn";  // nn | power-law | rydberg | all-to-all
  int L = 4;
  int Ly = 0;                 // 0: square L x L
  double delta = 0.5;
  double J = 1.0;
  double alpha = 3.0;
  double rb = 0.0;
  // solver
  std::string method = "rsw";  // ed | rsw | dtwa | oat
  int N = 0;                   // oat only; 0: L * Ly
  double chi = 0.0;            // oat only; 0: bare nearest-neighbour value
  std::string inertia = "tos"; // rsw: bare | tos | rescaled-from:L0
  bool spin_waves = true;
  double tmax = 10.0;
  double dt_out = 0.1;
  std::string grid = "linear"; // linear | log
  int n_log = 200;
  double t_first = 0.01;       // first nonzero time of the log grid
  double dt = 0.01;            // DTWA integrator step
  int ntraj = 5000;
  std::uint64_t seed = 1;
  double krylov_step = 0.1;
  double max_gib = 2.0;
  // output
  std::string output = "out/run.csv";

  int lx() const { return L; }
  int ly() const { return Ly > 0 ? Ly : L; }

  /// key = value lines in fixed order; parses back to an equal config.
  std::string serialize() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  /// Applies key=value overrides; throws ConfigError on unknown keys.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  nlohmann::json to_json() const;
  /// FNV-1a of serialize(), hex.
  std::string hash() const;
  std::vector<double> times() const;

  bool operator==(const RunConfig&) const = default;
};

/// FNV-1a 64-bit, hex.
std::string fnv1a_hex(const std::string& bytes);

/// Reads `key = value` lines, '#' comments allowed.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace spinsqz
