#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spinsqz/collective.hpp"
#include "spinsqz/lattice.hpp"
#include "spinsqz/rotor_oat.hpp"

namespace spinsqz {

struct SpinWaveMode {
  double kx;
  double ky;
  double Jk;
  double A;
  double B;
  double omega;
};

/// Bogoliubov modes for k != 0 plus the zero-momentum rotor.
struct SpinWaveSet {
  int N = 0;
  double J0 = 0.0;
  double delta = 0.0;
  std::vector<SpinWaveMode> modes;
  RotorModel rotor;
};

/// chi = J0 (1 - Delta) / (2 (N - 1)).
RotorModel bare_inertia(const CouplingMatrix& cm, double delta);

/// A_k = [J0 - J_k (1+Delta)/2]/2, B_k = -J_k (1-Delta)/4,
/// omega_k = sqrt(A_k^2 - B_k^2) = sqrt((J0 - J_k)(J0 - Delta J_k))/2.
/// Throws NumericalError("unstable spin-wave mode") when omega_k^2 < -tol.
SpinWaveSet dispersion(const CouplingMatrix& cm, double delta);

/// n_SW(t) = (1/N) sum_k (B_k/omega_k)^2 sin^2(omega_k t) after a quench from
/// the spin-wave vacuum. Soft modes contribute B_k^2 t^2.
double spin_wave_density(const SpinWaveSet& sw, double t);

/// Upper bound (1/N) sum_k (B_k/omega_k)^2 for stable gapped modes.
double spin_wave_density_bound(const SpinWaveSet& sw);

struct RswOptions {
  bool spin_waves = true;  // false drops n_SW, leaving the bare rotor
  double warn_density = 0.5;
};

/// m^x = <K^x>/N - n_SW with the transverse covariance of the rotor.
TimeSeries rsw_quench(const CouplingMatrix& cm, double delta, const RotorModel& rotor,
                      std::span<const double> times, const RswOptions& opts = {});

struct TowerFit {
  RotorModel rotor;          // N is left 0: a fit knows no size
  double E0 = 0.0;
  double max_rel_deviation = 0.0;
  std::vector<std::string> warnings;
};

/// Fits E_min(Jz) = E0 + chi Jz^2 with E0 pinned to the Jz = 0 sector and
/// residuals taken relative to chi Jz^2, i.e. chi is the mean of the
/// per-sector slopes (E(Jz) - E0)/Jz^2. Needs >= 4 sectors including Jz = 0.
TowerFit tos_fit(const std::vector<std::pair<double, double>>& sector_energies);

/// chi_N' = chi_N [J0(N')/(N'-1)] [(N-1)/J0(N)].
double rescale_inertia(double chi_N, const CouplingMatrix& cm_N, const CouplingMatrix& cm_Nprime);

struct RswLevel {
  int Kz;
  int n_sw_total;
  double energy;
  std::vector<int> modes;  // indices into SpinWaveSet::modes, one per quantum
};

struct RswSpectrum {
  double E0 = 0.0;
  std::vector<RswLevel> levels;  // ascending energy
};

/// Levels E0 + chi Kz^2 + sum omega_k n_k for |Kz| <= max_Kz and up to
/// max_sw spin-wave quanta.
RswSpectrum rsw_spectrum(const SpinWaveSet& sw, const RotorModel& rotor, double E0, int max_Kz,
                         int max_sw);

}  // namespace spinsqz
