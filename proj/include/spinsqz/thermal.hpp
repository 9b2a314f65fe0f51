#pragma once

#include <vector>

#include "spinsqz/ed.hpp"
#include "spinsqz/lattice.hpp"

namespace spinsqz {

/// Full spectrum of one magnetization sector. Sectors n_up and N - n_up are
/// spin-flip partners with equal spectra, so only n_up <= N/2 is stored and
/// `multiplicity` counts the partner.
struct ThermalSector {
  int n_up = 0;
  int multiplicity = 1;
  double sz = 0.0;
  std::vector<double> energies;
  std::vector<double> j2;  // <n|J^2|n>, empty unless vectors were requested
};

struct ThermalOptions {
  bool with_vectors = false;  // needed for var_jx
  EdOptions ed;
};

struct ThermalResult {
  int N = 0;
  double delta = 0.0;
  double E_ground = 0.0;
  double E_css = 0.0;  // <CSS|H|CSS> = -sum_{i<j} J_ij / 4
  std::vector<ThermalSector> sectors;

  /// Canonical energy at temperature T (k_B = 1).
  double energy(double T) const;
  /// Thermal Var(J^x)/N = <J^2 - Jz^2>/(2N); requires vectors.
  double var_jx(double T) const;
  /// Temperature with energy(T) = E, by bisection in log T on [lo, hi] to
  /// relative rel_tol. Throws ConfigError when E lies outside the bracket.
  double temperature_at(double E, double lo = 1e-3, double hi = 1e3, double rel_tol = 1e-6) const;
  /// temperature_at(E_css). Throws ConfigError when E_css < E_ground.
  double t_css() const;
};

/// Dense diagonalization of every sector (N <= 16).
ThermalResult thermal_solve(const CouplingMatrix& cm, double delta, const ThermalOptions& opts = {});

}  // namespace spinsqz
