#include "spinsqz/rotor_oat.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "spinsqz/error.hpp"

namespace spinsqz {

double RotorModel::inertia() const {
  return chi > 0.0 ? 0.5 / chi : std::numeric_limits<double>::infinity();
}

LadderState LadderState::coherent_x(int N) {
  if (N < 1) throw ConfigError("ladder needs N >= 1");
  LadderState s{N, std::vector<std::complex<double>>(N + 1)};
  const double log2 = std::log(2.0);
  for (int q = 0; q <= N; ++q) {
    const double log_binom = std::lgamma(N + 1.0) - std::lgamma(q + 1.0) - std::lgamma(N - q + 1.0);
    s.amp[q] = std::exp(0.5 * (log_binom - N * log2));
  }
  return s;
}

double LadderState::norm() const {
  double acc = 0.0;
  for (const auto& c : amp) acc += std::norm(c);
  return std::sqrt(acc);
}

LadderState evolve_ladder(const LadderState& s, const RotorModel& r, double t) {
  LadderState out = s;
  for (int q = 0; q <= s.N; ++q) {
    const double m = s.m(q);
    out.amp[q] *= std::polar(1.0, -m * m * r.chi * t);
  }
  return out;
}

CollectiveMoments ladder_moments(const LadderState& s, double t) {
  const int N = s.N;
  const double j = 0.5 * N;
  const double jj = j * (j + 1.0);
  LadderExpectations e{};
  double jpjm = 0.0;
  for (int q = 0; q <= N; ++q) {
    const double m = s.m(q);
    const double p = std::norm(s.amp[q]);
    e.jz += m * p;
    e.jz2 += m * m * p;
    jpjm += p * (2.0 * jj - 2.0 * m * m);  // <m|J+J- + J-J+|m>
    if (q + 1 <= N) {
      // J+|m> = sqrt(j(j+1) - m(m+1)) |m+1>
      const double a = std::sqrt(std::max(0.0, jj - m * (m + 1.0)));
      const auto overlap = std::conj(s.amp[q + 1]) * s.amp[q];
      e.jp += a * overlap;
      e.jp_jz += a * (2.0 * m + 1.0) * overlap;
      if (q + 2 <= N) {
        const double a2 = std::sqrt(std::max(0.0, jj - (m + 1.0) * (m + 2.0)));
        e.jp2 += a * a2 * std::conj(s.amp[q + 2]) * s.amp[q];
      }
    }
  }
  e.jpjm_plus_jmjp = jpjm;
  return assemble_moments(e, N, t);
}

TimeSeries oat_quench(const RotorModel& r, std::span<const double> times) {
  TimeSeries ts;
  const auto css = LadderState::coherent_x(r.N);
  ts.points.reserve(times.size());
  for (double t : times) {
    ts.points.push_back(
        squeezing_point_or_nan(ladder_moments(evolve_ladder(css, r, t), t), ts.warnings));
  }
  ts.metadata["solver"] = "oat";
  ts.metadata["N"] = r.N;
  ts.metadata["chi"] = r.chi;
  return ts;
}

namespace {

/// Minimizes f over log t in [a, b] by golden section.
double golden_log(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double la = std::log(a);
  double lb = std::log(b);
  double lc = lb - g * (lb - la);
  double ld = la + g * (lb - la);
  double fc = f(std::exp(lc));
  double fd = f(std::exp(ld));
  while (lb - la > rel_tol) {
    if (fc < fd) {
      lb = ld;
      ld = lc;
      fd = fc;
      lc = lb - g * (lb - la);
      fc = f(std::exp(lc));
    } else {
      la = lc;
      lc = ld;
      fc = fd;
      ld = la + g * (lb - la);
      fd = f(std::exp(ld));
    }
  }
  return std::exp(0.5 * (la + lb));
}

/// Brackets the first local minimum of f on a log grid starting near t0.
std::pair<double, double> bracket_first_min(const std::function<double(double)>& f, double t0) {
  const double ratio = 1.05;
  double t = t0 / 50.0;
  double prev2 = std::numeric_limits<double>::infinity();
  double prev = f(t);
  for (int i = 0; i < 2000; ++i) {
    const double tn = t * ratio;
    const double cur = f(tn);
    if (cur > prev && prev < prev2) return {t / ratio, tn};
    prev2 = prev;
    prev = cur;
    t = tn;
  }
  throw NumericalError("oat_optimum: no squeezing minimum found");
}

}  // namespace

OatOptimum oat_optimum(int N, double chi) {
  if (N < 4) throw ConfigError("oat_optimum needs N >= 4");
  if (!(chi > 0.0)) throw ConfigError("oat_optimum needs chi > 0");
  const RotorModel rotor{N, chi};
  const auto css = LadderState::coherent_x(N);
  auto point = [&](double t) { return squeezing_parameter(ladder_moments(evolve_ladder(css, rotor, t), t)); };
  auto xi2 = [&](double t) { return point(t).xi2; };
  auto vperp = [&](double t) { return point(t).v_perp_min; };
  // Leading-order OAT optimum: chi t ~ N^{-2/3}.
  const double t0 = std::pow(static_cast<double>(N), -2.0 / 3.0) / chi;
  constexpr double tol = 1e-8;
  auto [a1, b1] = bracket_first_min(xi2, t0);
  const double t_opt = golden_log(xi2, a1, b1, tol);
  auto [a2, b2] = bracket_first_min(vperp, t0);
  const double t_min = golden_log(vperp, a2, b2, tol);
  const auto at_opt = point(t_opt);
  return {N, chi, at_opt.xi2, t_opt, point(t_min).v_perp_min, t_min, at_opt.m_x};
}

}  // namespace spinsqz
