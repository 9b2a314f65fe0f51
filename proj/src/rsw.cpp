#include "spinsqz/rsw.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "spinsqz/error.hpp"

namespace spinsqz {

namespace {
constexpr double kSoftMode = 1e-12;
}

RotorModel bare_inertia(const CouplingMatrix& cm, double delta) {
  const int N = cm.size();
  return {N, cm.J0 * (1.0 - delta) / (2.0 * (N - 1))};
}

SpinWaveSet dispersion(const CouplingMatrix& cm, double delta) {
  const auto grid = fourier_coupling(cm);
  SpinWaveSet sw;
  sw.N = cm.size();
  sw.J0 = cm.J0;
  sw.delta = delta;
  sw.rotor = bare_inertia(cm, delta);
  const double tol = 1e-10 * std::max(1.0, cm.J0 * cm.J0);
  for (std::size_t i = 1; i < grid.k.size(); ++i) {
    const auto& k = grid.k[i];
    const double A = 0.5 * (cm.J0 - 0.5 * k.Jk * (1.0 + delta));
    const double B = -0.25 * k.Jk * (1.0 - delta);
    const double w2 = A * A - B * B;
    if (w2 < -tol) {
      std::ostringstream msg;
      msg << "unstable spin-wave mode at k=(" << k.kx << "," << k.ky << "): omega^2=" << w2;
      throw NumericalError(msg.str());
    }
    sw.modes.push_back({k.kx, k.ky, k.Jk, A, B, std::sqrt(std::max(0.0, w2))});
  }
  return sw;
}

double spin_wave_density(const SpinWaveSet& sw, double t) {
  double acc = 0.0;
  for (const auto& m : sw.modes) {
    if (m.omega < kSoftMode) {
      acc += m.B * m.B * t * t;
    } else {
      const double s = std::sin(m.omega * t);
      acc += (m.B / m.omega) * (m.B / m.omega) * s * s;
    }
  }
  return acc / sw.N;
}

double spin_wave_density_bound(const SpinWaveSet& sw) {
  double acc = 0.0;
  for (const auto& m : sw.modes) {
    if (m.omega >= kSoftMode) acc += (m.B / m.omega) * (m.B / m.omega);
  }
  return acc / sw.N;
}

TimeSeries rsw_quench(const CouplingMatrix& cm, double delta, const RotorModel& rotor,
                      std::span<const double> times, const RswOptions& opts) {
  const int N = cm.size();
  if (rotor.N != N) throw ConfigError("rsw_quench: rotor size does not match lattice");
  const auto sw = dispersion(cm, delta);
  const auto css = LadderState::coherent_x(N);
  TimeSeries ts;
  ts.points.reserve(times.size());
  bool warned = false;
  for (double t : times) {
    const auto k = ladder_moments(evolve_ladder(css, rotor, t), t);
    const double n_sw = opts.spin_waves ? spin_wave_density(sw, t) : 0.0;
    if (n_sw > opts.warn_density && !warned) {
      ts.warnings.push_back("spin-wave density large: RSW uncontrolled (n_SW=" +
                            std::to_string(n_sw) + " at t=" + std::to_string(t) + ")");
      warned = true;
    }
    CollectiveMoments m = k;
    m.mean.x() = k.mean.x() - N * n_sw;
    m.second = k.covariance() + m.mean * m.mean.transpose();
    auto p = squeezing_point_or_nan(m, ts.warnings);
    p.n_sw = n_sw;
    ts.points.push_back(p);
  }
  ts.metadata["solver"] = "rsw";
  ts.metadata["N"] = N;
  ts.metadata["chi"] = rotor.chi;
  ts.metadata["delta"] = delta;
  ts.metadata["spin_waves"] = opts.spin_waves;
  return ts;
}

TowerFit tos_fit(const std::vector<std::pair<double, double>>& sector_energies) {
  if (sector_energies.size() < 4) throw ConfigError("tos_fit needs at least 4 sectors");
  auto zero = std::find_if(sector_energies.begin(), sector_energies.end(),
                           [](const auto& p) { return std::abs(p.first) < 1e-9; });
  if (zero == sector_energies.end()) throw ConfigError("tos_fit needs the Jz = 0 sector");
  TowerFit fit;
  fit.E0 = zero->second;
  std::vector<double> slopes;
  for (const auto& [jz, e] : sector_energies) {
    if (std::abs(jz) < 1e-9) continue;
    slopes.push_back((e - fit.E0) / (jz * jz));
  }
  double chi = 0.0;
  for (double s : slopes) chi += s;
  chi /= static_cast<double>(slopes.size());
  fit.rotor = {0, chi};
  for (double s : slopes) {
    fit.max_rel_deviation = std::max(fit.max_rel_deviation, std::abs(s / chi - 1.0));
  }
  if (fit.max_rel_deviation > 0.25) {
    fit.warnings.push_back("ToS not quadratic: per-sector slopes deviate by " +
                           std::to_string(fit.max_rel_deviation) + " from the fit");
  }
  return fit;
}

double rescale_inertia(double chi_N, const CouplingMatrix& cm_N, const CouplingMatrix& cm_Nprime) {
  if (cm_N.spec.family != cm_Nprime.spec.family) {
    throw ConfigError("rescale_inertia: coupling families differ");
  }
  const double N = cm_N.size();
  const double Np = cm_Nprime.size();
  return chi_N * (cm_Nprime.J0 / (Np - 1.0)) * ((N - 1.0) / cm_N.J0);
}

RswSpectrum rsw_spectrum(const SpinWaveSet& sw, const RotorModel& rotor, double E0, int max_Kz,
                         int max_sw) {
  RswSpectrum spec{E0, {}};
  // Multisets of mode indices in non-decreasing order.
  std::vector<std::vector<int>> occupations{{}};
  std::function<void(std::vector<int>&, int, int)> extend = [&](std::vector<int>& cur, int start,
                                                                int left) {
    if (left == 0) return;
    for (int k = start; k < static_cast<int>(sw.modes.size()); ++k) {
      cur.push_back(k);
      occupations.push_back(cur);
      extend(cur, k, left - 1);
      cur.pop_back();
    }
  };
  std::vector<int> cur;
  extend(cur, 0, max_sw);
  for (int kz = -max_Kz; kz <= max_Kz; ++kz) {
    for (const auto& occ : occupations) {
      double e = E0 + rotor.chi * kz * kz;
      for (int k : occ) e += sw.modes[k].omega;
      spec.levels.push_back({kz, static_cast<int>(occ.size()), e, occ});
    }
  }
  std::stable_sort(spec.levels.begin(), spec.levels.end(),
                   [](const RswLevel& a, const RswLevel& b) { return a.energy < b.energy; });
  return spec;
}

}  // namespace spinsqz
