#include "spinsqz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "spinsqz/error.hpp"

namespace spinsqz {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw NumericalError("linear fit needs at least 2 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw NumericalError("linear fit: abscissae are all equal");
  LinearFit f;
  f.n = static_cast<int>(n);
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.rms_residual = std::sqrt(rss / n);
  if (n > 2) {
    const double s2 = rss / (n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

nlohmann::json to_json(const ScalingFit& f) {
  nlohmann::json j = {{"name", f.name},
                      {"value", f.value},
                      {"se", f.se},
                      {"window", {f.x_lo, f.x_hi}},
                      {"model", f.model == FitModel::PowerLaw ? "power-law" : "saturating"},
                      {"prefactor", f.prefactor},
                      {"rms_residual", f.rms_residual},
                      {"n_points", f.n_points}};
  if (f.model == FitModel::Saturating) {
    j["m_inf"] = f.m_inf;
    j["m_inf_se"] = f.m_inf_se;
  }
  return j;
}

ScalingFit fit_power_law(std::span<const double> x, std::span<const double> y, double sign,
                         const std::string& name) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("power-law fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const auto lf = linear_fit(lx, ly);
  ScalingFit f;
  f.name = name;
  f.value = sign * lf.slope;
  f.se = lf.slope_se;
  f.x_lo = *std::min_element(x.begin(), x.end());
  f.x_hi = *std::max_element(x.begin(), x.end());
  f.prefactor = std::exp(lf.intercept);
  f.rms_residual = lf.rms_residual;
  f.n_points = lf.n;
  return f;
}

ScalingFit fit_lambda(const TimeSeries& ts, double t_lo, double t_hi) {
  std::vector<double> t, m;
  for (const auto& p : ts.points) {
    if (p.t >= t_lo && p.t <= t_hi && p.m_x > 0.0) {
      t.push_back(p.t);
      m.push_back(p.m_x);
    }
  }
  if (t.size() < 6) {
    throw NumericalError("fewer than 6 points in the lambda fit window [" + std::to_string(t_lo) + ", " +
                         std::to_string(t_hi) + "]");
  }
  auto f = fit_power_law(t, m, -1.0, "lambda");
  f.x_lo = t_lo;
  f.x_hi = t_hi;
  return f;
}

std::optional<double> detect_drop(const TimeSeries& ts, const ScalingFit& fit, double t_lo, double threshold) {
  for (const auto& p : ts.points) {
    if (p.t < t_lo) continue;
    const double law = fit.prefactor * std::pow(p.t, -fit.value);
    if (!(p.m_x >= threshold * law)) return p.t;
  }
  return std::nullopt;
}

LambdaResult fit_lambda_auto(const TimeSeries& ts, const LambdaWindowOptions& opts) {
  if (ts.points.empty()) throw NumericalError("empty time series");
  LambdaResult res;
  const double t_end = ts.points.back().t;
  // first guess: where m_x has halved from its value at t_lo
  double m_lo = kNaN;
  std::optional<double> drop;
  for (const auto& p : ts.points) {
    if (p.t < opts.t_lo) continue;
    if (std::isnan(m_lo)) m_lo = p.m_x;
    if (p.m_x < opts.threshold * m_lo) {
      drop = p.t;
      break;
    }
  }
  for (int it = 0; it < opts.max_iter; ++it) {
    const double t_hi = drop ? opts.window_fraction * *drop : t_end;
    res.fit = fit_lambda(ts, opts.t_lo, t_hi);
    const auto next = detect_drop(ts, res.fit, opts.t_lo, opts.threshold);
    const bool same = (next.has_value() == drop.has_value()) && (!next || *next == *drop);
    drop = next;
    if (same) break;
  }
  res.t_drop = drop;
  if (!drop) res.warnings.push_back("no finite-size drop");
  return res;
}

OptimumScaling fit_optimum_scaling(std::span<const OptimumSample> points) {
  if (points.size() < 4) throw NumericalError("optimum scaling needs at least 4 sizes");
  std::vector<OptimumSample> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.N < b.N; });
  std::vector<double> N, xi, tm, vp;
  for (const auto& s : p) {
    N.push_back(s.N);
    xi.push_back(s.xi2_min);
    tm.push_back(s.t_min);
    vp.push_back(s.v_perp_min);
  }
  OptimumScaling out;
  for (std::size_t i = 1; i < xi.size(); ++i) {
    if (!(xi[i] < xi[i - 1])) {
      out.warnings.push_back("no scalable squeezing");
      break;
    }
  }
  out.nu = fit_power_law(N, xi, -1.0, "nu");
  out.mu = fit_power_law(N, tm, 1.0, "mu");
  out.nu0 = fit_power_law(N, vp, -1.0, "nu0");
  return out;
}

ExponentRelation check_exponent_relation(double nu, double nu0, double lambda, double mu) {
  ExponentRelation r;
  r.predicted = nu0 - 2.0 * lambda * mu;
  r.residual = nu - r.predicted;
  r.rsw_form = (1.0 - lambda) * nu0;
  return r;
}

std::optional<double> zero_crossing(const TimeSeries& ts) {
  for (std::size_t i = 1; i < ts.points.size(); ++i) {
    const auto& a = ts.points[i - 1];
    const auto& b = ts.points[i];
    if (a.m_x > 0.0 && b.m_x <= 0.0) return a.t + (b.t - a.t) * a.m_x / (a.m_x - b.m_x);
  }
  return std::nullopt;
}

std::optional<double> decay_time(const TimeSeries& ts, double fraction) {
  if (ts.points.empty()) return std::nullopt;
  const double target = fraction * ts.points.front().m_x;
  for (std::size_t i = 1; i < ts.points.size(); ++i) {
    const auto& a = ts.points[i - 1];
    const auto& b = ts.points[i];
    if (a.m_x > target && b.m_x <= target) return a.t + (b.t - a.t) * (a.m_x - target) / (a.m_x - b.m_x);
  }
  return std::nullopt;
}

namespace {

double relative_spread(const std::vector<double>& v) {
  std::vector<double> ok;
  for (double x : v) {
    if (std::isfinite(x)) ok.push_back(x);
  }
  if (ok.size() < 2) return kNaN;
  const auto [lo, hi] = std::minmax_element(ok.begin(), ok.end());
  double mean = 0.0;
  for (double x : ok) mean += x / ok.size();
  return (*hi - *lo) / mean;
}

}  // namespace

nlohmann::json to_json(const DropCollapse& d) {
  auto nan_to_null = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return a;
  };
  return {{"L", d.L},
          {"t_drop", nan_to_null(d.t_drop)},
          {"t_drop_over_L", nan_to_null(d.ratio)},
          {"spread", std::isfinite(d.spread) ? nlohmann::json(d.spread) : nlohmann::json(nullptr)},
          {"tau", nan_to_null(d.tau)},
          {"tau_spread", std::isfinite(d.tau_spread) ? nlohmann::json(d.tau_spread) : nlohmann::json(nullptr)},
          {"warnings", d.warnings}};
}

DropCollapse drop_time_collapse(const std::map<int, TimeSeries>& series, const LambdaWindowOptions& opts) {
  DropCollapse d;
  for (const auto& [L, ts] : series) {
    d.L.push_back(L);
    std::optional<double> drop;
    try {
      drop = fit_lambda_auto(ts, opts).t_drop;
    } catch (const NumericalError& e) {
      d.warnings.push_back("L=" + std::to_string(L) + ": " + e.what());
    }
    if (!drop) d.warnings.push_back("L=" + std::to_string(L) + ": no finite-size drop");
    d.t_drop.push_back(drop ? *drop : kNaN);
    d.ratio.push_back(drop ? *drop / L : kNaN);
    const auto tau = decay_time(ts);
    d.tau.push_back(tau ? *tau : kNaN);
  }
  d.spread = relative_spread(d.ratio);
  d.tau_spread = relative_spread(d.tau);
  return d;
}

ScalingFit fit_saturating(std::span<const double> N, std::span<const double> m) {
  const std::size_t n = N.size();
  if (n < 5 || m.size() != n) throw NumericalError("saturating fit needs at least 5 sizes");
  // for fixed sigma the model is linear in (m_inf, a)
  auto solve = [&](double sigma, double& m_inf, double& a) {
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = -std::pow(N[i], -sigma);
      y(i) = m[i];
    }
    const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
    m_inf = c(0);
    a = c(1);
    return (X * c - y).squaredNorm();
  };
  double m_inf = 0.0, a = 0.0;
  double best_s = 0.01;
  double best = std::numeric_limits<double>::infinity();
  for (double s = 0.01; s <= 5.0; s *= 1.05) {
    const double r = solve(s, m_inf, a);
    if (r < best) {
      best = r;
      best_s = s;
    }
  }
  double lo = best_s / 1.05, hi = best_s * 1.05;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = solve(x1, m_inf, a), f2 = solve(x2, m_inf, a);
  while (hi - lo > 1e-12 * hi) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = solve(x1, m_inf, a);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = solve(x2, m_inf, a);
    }
  }
  const double sigma = 0.5 * (lo + hi);
  const double rss = solve(sigma, m_inf, a);
  ScalingFit f;
  f.name = "sigma";
  f.model = FitModel::Saturating;
  f.value = sigma;
  f.m_inf = m_inf;
  f.prefactor = a;
  f.n_points = static_cast<int>(n);
  f.x_lo = *std::min_element(N.begin(), N.end());
  f.x_hi = *std::max_element(N.begin(), N.end());
  f.rms_residual = std::sqrt(rss / n);
  if (n > 3) {
    Eigen::MatrixXd Jac(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::pow(N[i], -sigma);
      Jac(i, 0) = 1.0;
      Jac(i, 1) = -p;
      Jac(i, 2) = a * std::log(N[i]) * p;
    }
    const Eigen::Matrix3d JtJ = Jac.transpose() * Jac;
    const Eigen::Matrix3d cov = (rss / (n - 3)) * JtJ.completeOrthogonalDecomposition().pseudoInverse();
    f.m_inf_se = std::sqrt(std::max(0.0, cov(0, 0)));
    f.se = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return f;
}

}  // namespace spinsqz
