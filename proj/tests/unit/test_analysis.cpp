#include <doctest.h>

#include <cmath>
#include <random>

#include "spinsqz/analysis.hpp"
#include "spinsqz/error.hpp"

using namespace spinsqz;

namespace {

/// m_x = 0.5 t^-lambda on a log grid, falling to a tenth after t_drop.
TimeSeries synthetic(double lambda, double t_drop, double t_end = 200.0, int n = 400) {
  TimeSeries ts;
  for (int i = 0; i < n; ++i) {
    const double t = 0.1 * std::pow(t_end / 0.1, i / (n - 1.0));
    SqueezingPoint p;
    p.t = t;
    p.m_x = 0.5 * std::pow(t, -lambda) * (t < t_drop ? 1.0 : 0.1);
    ts.points.push_back(p);
  }
  return ts;
}

TimeSeries linear_decay(double tau, double t_end = 20.0) {
  TimeSeries ts;
  for (int i = 0; i <= 200; ++i) {
    SqueezingPoint p;
    p.t = t_end * i / 200.0;
    p.m_x = 0.5 * (1.0 - p.t / tau);
    ts.points.push_back(p);
  }
  return ts;
}

}  // namespace

TEST_CASE("linear and power-law fits") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {3, 5, 7, 9, 11};
  const auto lf = linear_fit(x, y);
  CHECK(lf.slope == doctest::Approx(2.0));
  CHECK(lf.intercept == doctest::Approx(1.0));
  CHECK(lf.slope_se < 1e-12);

  std::vector<double> N, v;
  for (double n : {64.0, 144.0, 256.0, 400.0}) {
    N.push_back(n);
    v.push_back(3.0 * std::pow(n, -0.7));
  }
  const auto pl = fit_power_law(N, v, -1.0, "nu0");
  CHECK(pl.value == doctest::Approx(0.7));
  CHECK(pl.prefactor == doctest::Approx(3.0));
  CHECK(pl.n_points == 4);
  CHECK(pl.x_lo == 64.0);
  CHECK(pl.x_hi == 400.0);
  const auto j = to_json(pl);
  CHECK(j["name"] == "nu0");
  CHECK(j["model"] == "power-law");
  CHECK(!j.contains("m_inf"));

  const std::vector<double> bad = {1.0, -1.0, 2.0};
  CHECK_THROWS_AS(fit_power_law(std::vector<double>{1, 2, 3}, bad, 1.0, "x"), NumericalError);
  CHECK_THROWS_AS(linear_fit(std::vector<double>{1}, std::vector<double>{1}), NumericalError);
}

TEST_CASE("lambda recovery") {
  const auto ts = synthetic(0.1, 40.0);
  SUBCASE("fixed window") {
    const auto f = fit_lambda(ts, 2.0, 20.0);
    CHECK(f.value == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(f.prefactor == doctest::Approx(0.5).epsilon(1e-10));
    // insensitive to the window inside the power-law regime
    CHECK(fit_lambda(ts, 3.0, 30.0).value == doctest::Approx(0.1).epsilon(1e-10));
  }
  SUBCASE("automatic window and drop") {
    const auto r = fit_lambda_auto(ts);
    REQUIRE(r.t_drop.has_value());
    CHECK(*r.t_drop >= 40.0);
    CHECK(*r.t_drop < 40.0 * 1.03);
    CHECK(r.fit.x_hi == doctest::Approx(0.6 * *r.t_drop));
    CHECK(r.fit.value == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(r.warnings.empty());
  }
  SUBCASE("no drop") {
    const auto r = fit_lambda_auto(synthetic(0.045, 1e9));
    CHECK(!r.t_drop);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0] == "no finite-size drop");
    CHECK(r.fit.value == doctest::Approx(0.045).epsilon(1e-10));
  }
  SUBCASE("too few points") {
    CHECK_THROWS_WITH_AS(fit_lambda(ts, 2.0, 2.1), doctest::Contains("fewer than 6 points"), NumericalError);
  }
  SUBCASE("drop detection threshold") {
    const auto f = fit_lambda(ts, 2.0, 20.0);
    CHECK(detect_drop(ts, f, 2.0, 0.05) == std::nullopt);
    CHECK(detect_drop(ts, f, 2.0, 0.5).has_value());
  }
}

TEST_CASE("lambda standard errors cover the truth") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto clean = synthetic(0.1, 1e9, 20.0, 120);
  int covered = 0;
  const int trials = 400;
  for (int k = 0; k < trials; ++k) {
    auto ts = clean;
    for (auto& p : ts.points) p.m_x *= std::exp(noise(rng));
    const auto f = fit_lambda(ts, 2.0, 20.0);
    if (std::abs(f.value - 0.1) <= 2.0 * f.se) ++covered;
  }
  // a two-sigma interval covers about 95% of fits
  CHECK(covered >= 0.9 * trials);
  CHECK(covered <= 0.99 * trials);
}

TEST_CASE("optimum scaling") {
  std::vector<OptimumSample> s;
  for (double N : {64.0, 144.0, 256.0, 576.0, 1024.0}) {
    s.push_back({N, 2.0 * std::pow(N, -0.6), 0.5 * std::pow(N, 0.33), std::pow(N, -0.7)});
  }
  const auto o = fit_optimum_scaling(s);
  CHECK(o.nu.value == doctest::Approx(0.6));
  CHECK(o.mu.value == doctest::Approx(0.33));
  CHECK(o.nu0.value == doctest::Approx(0.7));
  CHECK(o.warnings.empty());
  s[3].xi2_min = s[1].xi2_min;
  const auto flat = fit_optimum_scaling(s);
  REQUIRE(flat.warnings.size() == 1);
  CHECK(flat.warnings[0] == "no scalable squeezing");
  CHECK_THROWS_AS(fit_optimum_scaling(std::span(s).first(3)), NumericalError);
}

TEST_CASE("exponent relation") {
  const auto r = check_exponent_relation(0.61, 2.0 / 3.0, 0.1, 1.0 / 3.0);
  CHECK(r.predicted == doctest::Approx(0.6));
  CHECK(r.residual == doctest::Approx(0.01));
  CHECK(r.rsw_form == doctest::Approx(0.6));
  const auto z = check_exponent_relation(0.73, 0.73, 0.0, 0.3);
  CHECK(z.residual == doctest::Approx(0.0));
}

TEST_CASE("zero crossing and drop collapse") {
  CHECK(*zero_crossing(linear_decay(5.0)) == doctest::Approx(5.0));
  CHECK(!zero_crossing(synthetic(0.1, 1e9)));

  std::map<int, TimeSeries> ferro;
  for (int L : {16, 32, 48}) ferro[L] = synthetic(0.1, 2.5 * L, 400.0, 2000);
  const auto d = drop_time_collapse(ferro);
  CHECK(d.L == std::vector<int>{16, 32, 48});
  CHECK(d.spread < 0.01);
  for (double r : d.ratio) CHECK(r == doctest::Approx(2.5).epsilon(0.01));
  // the power law alone never falls to 1/e inside the series, the drop does
  for (std::size_t i = 0; i < d.L.size(); ++i) CHECK(d.tau[i] == doctest::Approx(d.t_drop[i]).epsilon(0.03));
  const auto j = to_json(d);
  CHECK(j["tau"].size() == 3);
  CHECK(j["t_drop_over_L"].size() == 3);

  std::map<int, TimeSeries> para;
  for (int L : {16, 32, 48}) para[L] = linear_decay(3.0);
  const auto p = drop_time_collapse(para);
  CHECK(p.tau_spread < 1e-12);
  for (double tau : p.tau) CHECK(tau == doctest::Approx(3.0 * (1.0 - std::exp(-1.0))).epsilon(1e-3));
  CHECK(*decay_time(linear_decay(3.0), 0.5) == doctest::Approx(1.5));
  CHECK(!decay_time(synthetic(0.1, 1e9, 20.0), 0.1));
}

TEST_CASE("saturating fit") {
  std::vector<double> N, m;
  for (double n : {16.0, 36.0, 64.0, 144.0, 256.0, 576.0, 1024.0}) {
    N.push_back(n);
    m.push_back(0.3 - 0.5 * std::pow(n, -0.8));
  }
  const auto f = fit_saturating(N, m);
  CHECK(f.model == FitModel::Saturating);
  CHECK(f.value == doctest::Approx(0.8).epsilon(1e-5));
  CHECK(f.m_inf == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(f.prefactor == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(to_json(f).contains("m_inf"));
  CHECK_THROWS_AS(fit_saturating(std::span(N).first(4), std::span(m).first(4)), NumericalError);
}
