#pragma once

#include <complex>
#include <span>
#include <vector>

#include "spinsqz/collective.hpp"

namespace spinsqz {

/// Planar rotor with H = chi (K^z)^2, chi = 1/(2I).
struct RotorModel {
  int N = 0;
  double chi = 0.0;

  double inertia() const;  // I = 1/(2 chi); +inf for chi = 0
};

/// Amplitudes c_m on the maximal-spin Dicke ladder j = N/2. Entry q holds
/// m = q - N/2, so odd N gets half-integer m.
struct LadderState {
  int N = 0;
  std::vector<std::complex<double>> amp;

  /// Coherent state along +x: c_m = 2^{-N/2} sqrt(C(N, N/2+m)).
  static LadderState coherent_x(int N);

  double m(int q) const { return q - 0.5 * N; }
  double norm() const;
};

LadderState evolve_ladder(const LadderState& s, const RotorModel& r, double t);

CollectiveMoments ladder_moments(const LadderState& s, double t = 0.0);

/// Squeezing time series of the rotor started from the x coherent state.
TimeSeries oat_quench(const RotorModel& r, std::span<const double> times);

struct OatOptimum {
  int N;
  double chi;
  double xi2_min;
  double t_opt;       // argmin of xi2
  double v_perp_min;
  double t_min;       // argmin of v_perp
  double m_x_at_opt;
};

/// Golden-section minimization (relative tolerance 1e-8 in t) of xi2(t) and
/// v_perp(t) around the first squeezing minimum.
OatOptimum oat_optimum(int N, double chi);

}  // namespace spinsqz
