#include "spinsqz/collective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spinsqz/error.hpp"

namespace spinsqz {

CollectiveMoments assemble_moments(const LadderExpectations& e, int N, double t) {
  CollectiveMoments m;
  m.t = t;
  m.N = N;
  m.mean = Vec3(e.jp.real(), e.jp.imag(), e.jz);
  const double xx = 0.25 * (2.0 * e.jp2.real() + e.jpjm_plus_jmjp);
  const double yy = 0.25 * (-2.0 * e.jp2.real() + e.jpjm_plus_jmjp);
  const double xy = 0.5 * e.jp2.imag();
  const double xz = 0.5 * e.jp_jz.real();
  const double yz = 0.5 * e.jp_jz.imag();
  m.second << xx, xy, xz, xy, yy, yz, xz, yz, e.jz2;
  return m;
}

std::pair<Vec3, Vec3> transverse_frame(const Vec3& axis) {
  const Vec3 n = axis.normalized();
  // Project the lab axis least aligned with n; y is preferred so that an
  // x-polarized state gets the (y, z) frame.
  Vec3 ref = Vec3::UnitY();
  if (std::abs(n.dot(ref)) > 0.9) ref = Vec3::UnitZ();
  Vec3 e1 = (ref - ref.dot(n) * n).normalized();
  Vec3 e2 = n.cross(e1);
  return {e1, e2};
}

TransverseVariance min_transverse_variance(const CollectiveMoments& m, double eps_rel) {
  const double norm = m.mean.norm();
  if (!(norm >= eps_rel * std::max(1, m.N))) {
    throw NumericalError("polarization lost: squeezing frame undefined");
  }
  auto [e1, e2] = transverse_frame(m.mean);
  const Mat3 cov = m.covariance();
  const double v11 = e1.dot(cov * e1);
  const double v22 = e2.dot(cov * e2);
  const double c = e1.dot(cov * e2);
  const double value =
      0.5 * (v11 + v22) - std::sqrt(0.25 * (v11 - v22) * (v11 - v22) + c * c);
  // Var(theta) = (v11+v22)/2 + (v11-v22)/2 cos 2theta + c sin 2theta is
  // maximal at 2theta = atan2(2c, v11-v22); the minimum is a quarter turn away.
  double theta = 0.5 * std::atan2(2.0 * c, v11 - v22) + 0.5 * std::numbers::pi;
  if (theta > 0.5 * std::numbers::pi) theta -= std::numbers::pi;
  return {value, theta, v11, v22, c, e1, e2};
}

SqueezingPoint squeezing_parameter(const CollectiveMoments& m) {
  const auto tv = min_transverse_variance(m);
  const double n = static_cast<double>(m.N);
  SqueezingPoint p;
  p.t = m.t;
  p.m_x = m.mean.x() / n;
  p.var_jx = (m.second(0, 0) - m.mean.x() * m.mean.x()) / n;
  p.var_e1 = tv.var_e1 / n;
  p.var_e2 = tv.var_e2 / n;
  p.cov12 = tv.cov12 / n;
  p.v_perp_min = tv.value / n;
  p.theta_min = tv.theta;
  p.xi2 = n * tv.value / m.mean.squaredNorm();
  return p;
}

SqueezingPoint squeezing_point_or_nan(const CollectiveMoments& m,
                                      std::vector<std::string>& warnings) {
  try {
    return squeezing_parameter(m);
  } catch (const NumericalError& err) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(m.N);
    SqueezingPoint p;
    p.t = m.t;
    p.m_x = m.mean.x() / n;
    p.var_jx = (m.second(0, 0) - m.mean.x() * m.mean.x()) / n;
    p.var_e1 = p.var_e2 = p.cov12 = p.v_perp_min = p.theta_min = p.xi2 = nan;
    warnings.push_back(std::string(err.what()) + " at t=" + std::to_string(m.t));
    return p;
  }
}

int entanglement_depth(double xi2) {
  if (!(xi2 > 0.0) || xi2 >= 1.0) return 1;
  return static_cast<int>(std::ceil(1.0 / xi2 - 1e-12));
}

std::vector<double> TimeSeries::times() const { return column(&SqueezingPoint::t); }

std::vector<double> TimeSeries::column(double SqueezingPoint::*field) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.*field);
  return out;
}

std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                                          double y2) {
  // Newton form: y = y0 + d1 (x-x0) + d2 (x-x0)(x-x1).
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double d2 = (d12 - d01) / (x2 - x0);
  if (!(d2 > 0.0)) return {x1, y1};
  const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * d2);
  const double yv = y0 + d01 * (xv - x0) + d2 * (xv - x0) * (xv - x1);
  return {std::clamp(xv, x0, x2), yv};
}

namespace {

std::pair<double, double> refined_min(const std::vector<double>& t, const std::vector<double>& y,
                                      const char* what) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::isnan(y[i])) continue;
    if (!found || y[i] < y[best]) {
      best = i;
      found = true;
    }
  }
  if (!found) throw NumericalError(std::string("find_optimum: no finite ") + what + " values");
  if (best == 0 || best + 1 == y.size() || std::isnan(y[best - 1]) || std::isnan(y[best + 1])) {
    throw NumericalError(std::string("find_optimum: minimum of ") + what +
                         " on grid boundary, extend time window");
  }
  return parabola_vertex(t[best - 1], y[best - 1], t[best], y[best], t[best + 1], y[best + 1]);
}

}  // namespace

Optimum find_optimum(const TimeSeries& ts) {
  const auto t = ts.times();
  const auto v = ts.column(&SqueezingPoint::v_perp_min);
  const auto x = ts.column(&SqueezingPoint::xi2);
  const auto mx = ts.column(&SqueezingPoint::m_x);
  auto [t_min, v_min] = refined_min(t, v, "v_perp_min");
  auto [t_opt, xi_opt] = refined_min(t, x, "xi2");
  // m_x at t_min by linear interpolation.
  const auto it = std::upper_bound(t.begin(), t.end(), t_min);
  const std::size_t hi = std::clamp<std::size_t>(it - t.begin(), 1, t.size() - 1);
  const double w = (t_min - t[hi - 1]) / (t[hi] - t[hi - 1]);
  const double m_at = (1.0 - w) * mx[hi - 1] + w * mx[hi];
  return {t_min, v_min, t_opt, xi_opt, m_at};
}

}  // namespace spinsqz
