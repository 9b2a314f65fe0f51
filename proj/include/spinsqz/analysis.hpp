#pragma once

#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsqz/collective.hpp"

namespace spinsqz {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double rms_residual = 0.0;
  int n = 0;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

enum class FitModel { PowerLaw, Saturating };

struct ScalingFit {
  std::string name;
  double value = 0.0;  // exponent
  double se = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  FitModel model = FitModel::PowerLaw;
  double prefactor = 0.0;     // A in A x^{+-value}, or a in m_inf - a N^{-sigma}
  double m_inf = 0.0;         // saturating model only
  double m_inf_se = 0.0;
  double rms_residual = 0.0;  // log residual for power laws, linear for saturating
  int n_points = 0;
};

nlohmann::json to_json(const ScalingFit& f);

/// y ~ A x^{sign * value}: value = sign * slope of log y against log x.
ScalingFit fit_power_law(std::span<const double> x, std::span<const double> y, double sign,
                         const std::string& name);

/// lambda from m_x ~ t^{-lambda} over [t_lo, t_hi]. Throws NumericalError with
/// fewer than 6 points in the window.
ScalingFit fit_lambda(const TimeSeries& ts, double t_lo, double t_hi);

/// First time after t_lo where m_x falls below threshold times the power law
/// A t^{-lambda} of `fit`.
std::optional<double> detect_drop(const TimeSeries& ts, const ScalingFit& fit, double t_lo,
                                  double threshold = 0.5);

struct LambdaWindowOptions {
  double t_lo = 2.0;
  double window_fraction = 0.6;  // t_hi = fraction * t_drop
  double threshold = 0.5;
  int max_iter = 20;
};

struct LambdaResult {
  ScalingFit fit;
  std::optional<double> t_drop;
  std::vector<std::string> warnings;
};

/// lambda on the default window [t_lo, 0.6 t_drop], iterating fit and drop
/// detection until the drop time is stable. Without a drop the window runs to
/// the end of the series and a "no finite-size drop" warning is recorded.
LambdaResult fit_lambda_auto(const TimeSeries& ts, const LambdaWindowOptions& opts = {});

struct OptimumSample {
  double N;
  double xi2_min;
  double t_min;
  double v_perp_min;
};

struct OptimumScaling {
  ScalingFit nu;   // xi2_min ~ N^{-nu}
  ScalingFit mu;   // t_min ~ N^{mu}
  ScalingFit nu0;  // v_perp_min ~ N^{-nu0}
  std::vector<std::string> warnings;
};

/// Needs >= 4 sizes. Warns "no scalable squeezing" when xi2_min does not
/// decrease monotonically with N.
OptimumScaling fit_optimum_scaling(std::span<const OptimumSample> points);

struct ExponentRelation {
  double predicted;  // nu0 - 2 lambda mu
  double residual;   // nu - predicted
  double rsw_form;   // (1 - lambda) nu0
};

ExponentRelation check_exponent_relation(double nu, double nu0, double lambda, double mu);

/// Zero crossing of m_x by linear interpolation.
std::optional<double> zero_crossing(const TimeSeries& ts);

/// First time m_x falls to `fraction` of its initial value, interpolated.
std::optional<double> decay_time(const TimeSeries& ts, double fraction = 1.0 / std::numbers::e);

struct DropCollapse {
  std::vector<int> L;
  std::vector<double> t_drop;  // NaN where absent
  std::vector<double> ratio;   // t_drop / L
  double spread = 0.0;         // (max - min) / mean of ratio
  std::vector<double> tau;     // 1/e decay times of m_x, NaN where absent
  double tau_spread = 0.0;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const DropCollapse& d);

/// Drop times per linear size and their spread after dividing by L, plus the
/// spread of the 1/e decay times used for the paramagnetic collapse.
DropCollapse drop_time_collapse(const std::map<int, TimeSeries>& series,
                                const LambdaWindowOptions& opts = {});

/// m_x_min(N) = m_inf - a N^{-sigma}; value is sigma. Needs >= 5 sizes.
ScalingFit fit_saturating(std::span<const double> N, std::span<const double> m);

}  // namespace spinsqz
