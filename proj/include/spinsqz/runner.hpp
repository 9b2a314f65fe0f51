#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spinsqz/collective.hpp"
#include "spinsqz/lattice.hpp"
#include "spinsqz/rotor_oat.hpp"
#include "spinsqz/run_config.hpp"

namespace spinsqz {

CouplingMatrix couplings_for(const RunConfig& cfg);

/// Rotor for an RSW run: bare value, ED tower fit on the same lattice, or a
/// tower fit on an L0 x L0 lattice rescaled to this one. `info` records how.
RotorModel resolve_inertia(const RunConfig& cfg, const CouplingMatrix& cm, nlohmann::json& info);

/// OAT size and twisting rate: N falls back to L*Ly, chi to the bare value
/// J0 (1 - Delta) / (2 (N - 1)) with J0 of the configured family.
RotorModel oat_rotor(const RunConfig& cfg);

struct QuenchOutput {
  TimeSeries series;
  nlohmann::json manifest;
};

/// Runs the configured solver. The manifest carries the full config, its hash,
/// the code version, the seed, wall time and solver diagnostics; the output
/// hash is added by write_quench.
QuenchOutput run_quench(const RunConfig& cfg);

std::string manifest_path(const std::string& csv_path);

/// Writes CSV, JSON sidecar and manifest; returns the output hash.
std::string write_quench(QuenchOutput& out, const RunConfig& cfg);

/// True when a manifest for this exact config exists next to an unchanged CSV.
bool run_is_complete(const RunConfig& cfg);

/// Optima, lambda per series and the exponent fits over a size sweep.
/// Sizes with a failing analysis are reported, not fatal.
nlohmann::json scaling_report(const std::vector<std::pair<double, TimeSeries>>& runs);

struct CampaignSpec {
  RunConfig base;
  std::vector<int> sizes;  // L for lattice methods, N for oat
  std::string dir = "out/campaign";

  /// Config keys plus `sizes = a,b,c` and `dir = path`.
  static CampaignSpec parse(const std::string& text);
  static CampaignSpec load(const std::string& path);
  RunConfig config_for(int size) const;
};

/// Runs each size unless already complete, then writes dir/report.json.
nlohmann::json run_campaign(const CampaignSpec& spec, std::ostream* log = nullptr);

}  // namespace spinsqz
