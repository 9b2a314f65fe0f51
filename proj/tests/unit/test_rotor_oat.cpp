#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinsqz/collective.hpp"
#include "spinsqz/error.hpp"
#include "spinsqz/rotor_oat.hpp"

using namespace spinsqz;
using cd = std::complex<double>;

namespace {

/// Dense spin-j matrices in the |m> basis, m = -j..j.
struct DenseSpin {
  Eigen::MatrixXcd x, y, z;
  explicit DenseSpin(int N) {
    const int d = N + 1;
    const double j = 0.5 * N;
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(d, d);
    z = Eigen::MatrixXcd::Zero(d, d);
    for (int q = 0; q < d; ++q) {
      const double m = q - j;
      z(q, q) = m;
      if (q + 1 < d) p(q + 1, q) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    x = 0.5 * (p + p.adjoint());
    y = cd(0, -0.5) * (p - p.adjoint());
  }
};

CollectiveMoments dense_moments(const DenseSpin& S, const Eigen::VectorXcd& psi, int N) {
  const Eigen::MatrixXcd* ops[3] = {&S.x, &S.y, &S.z};
  CollectiveMoments m;
  m.N = N;
  for (int a = 0; a < 3; ++a) {
    m.mean(a) = psi.dot(*ops[a] * psi).real();
    for (int b = 0; b < 3; ++b) {
      m.second(a, b) = 0.5 * psi.dot((*ops[a] * *ops[b] + *ops[b] * *ops[a]) * psi).real();
    }
  }
  return m;
}

Eigen::VectorXcd dense_evolve(const DenseSpin& S, const Eigen::VectorXcd& psi0, double chi, double t) {
  Eigen::MatrixXcd U = (cd(0, -chi * t) * S.z * S.z).exp();
  return U * psi0;
}

Eigen::VectorXcd dense_css(const DenseSpin& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S.x);
  return es.eigenvectors().col(S.x.rows() - 1);
}

}  // namespace

TEST_CASE("coherent state amplitudes") {
  for (int N : {1, 4, 7, 40}) {
    const auto s = LadderState::coherent_x(N);
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const auto m = ladder_moments(s);
    CHECK(m.mean.x() == doctest::Approx(0.5 * N));
    CHECK(std::abs(m.mean.y()) < 1e-12);
    CHECK(std::abs(m.mean.z()) < 1e-12);
    const Mat3 c = m.covariance();
    CHECK(c(1, 1) == doctest::Approx(0.25 * N));
    CHECK(c(2, 2) == doctest::Approx(0.25 * N));
  }
}

TEST_CASE("t = 0 is the identity") {
  const auto s = LadderState::coherent_x(9);
  const auto e = evolve_ladder(s, RotorModel{9, 0.7}, 0.0);
  for (int q = 0; q <= 9; ++q) CHECK(std::abs(e.amp[q] - s.amp[q]) == 0.0);
}

TEST_CASE("magnetization closed form") {
  for (int N = 2; N <= 12; ++N) {
    const RotorModel r{N, 0.37};
    const auto s = LadderState::coherent_x(N);
    for (double t = 0.0; t <= 8.0; t += 0.25) {
      const auto m = ladder_moments(evolve_ladder(s, r, t), t);
      const double expected = 0.5 * N * std::pow(std::cos(r.chi * t), N - 1);
      CHECK(std::abs(m.mean.x() - expected) < 1e-12);
      CHECK(std::abs(m.mean.y()) < 1e-12);
      CHECK(std::abs(m.mean.z()) < 1e-12);
      // conserved: Jz statistics and total spin
      const Mat3 c = m.covariance();
      CHECK(c(2, 2) == doctest::Approx(0.25 * N).epsilon(1e-12));
      CHECK(m.second.trace() == doctest::Approx(0.5 * N * (0.5 * N + 1.0)).epsilon(1e-12));
      CHECK(evolve_ladder(s, r, t).norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("phases are periodic for even N") {
  const int N = 10;
  const RotorModel r{N, 0.5};
  const auto s = LadderState::coherent_x(N);
  const double period = 2.0 * std::numbers::pi / r.chi;
  const auto a = evolve_ladder(s, r, 1.3);
  const auto b = evolve_ladder(s, r, 1.3 + period);
  for (int q = 0; q <= N; ++q) CHECK(std::abs(a.amp[q] - b.amp[q]) < 1e-12);
}

TEST_CASE("ladder agrees with dense evolution") {
  for (int N : {3, 4, 6}) {
    const DenseSpin S(N);
    const auto psi0 = dense_css(S);
    const RotorModel r{N, 1.0};
    const auto s = LadderState::coherent_x(N);
    for (double t : {0.0, 0.1, 0.35, 0.8, 1.7}) {
      const auto a = squeezing_parameter(ladder_moments(evolve_ladder(s, r, t), t));
      const auto b = squeezing_parameter(dense_moments(S, dense_evolve(S, psi0, r.chi, t), N));
      CHECK(a.xi2 == doctest::Approx(b.xi2).epsilon(1e-10));
      CHECK(std::abs(a.v_perp_min - b.v_perp_min) < 1e-10);
      CHECK(std::abs(a.m_x - b.m_x) < 1e-12);
      // the CSS is isotropic in the transverse plane, so no angle at t = 0
      if (t > 0.0) CHECK(std::abs(a.theta_min - b.theta_min) < 1e-8);
    }
  }
}

TEST_CASE("N = 4 optimum against a dense scan") {
  const int N = 4;
  const DenseSpin S(N);
  const auto psi0 = dense_css(S);
  auto xi2 = [&](double t) { return squeezing_parameter(dense_moments(S, dense_evolve(S, psi0, 1.0, t), N)).xi2; };
  // first local minimum on a fine grid, then a local ternary refinement
  double prev = xi2(0.0), t_best = 0.0;
  const double h = 1e-3;
  for (double t = h;; t += h) {
    const double cur = xi2(t);
    if (cur > prev) {
      t_best = t - h;
      break;
    }
    prev = cur;
  }
  double lo = t_best - h, hi = t_best + h;
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (xi2(m1) < xi2(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const auto opt = oat_optimum(N, 1.0);
  CHECK(opt.t_opt == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
  CHECK(opt.xi2_min == doctest::Approx(xi2(0.5 * (lo + hi))).epsilon(1e-10));
  CHECK(opt.xi2_min < 1.0);
}

TEST_CASE("optimum scales with 1/chi") {
  const auto a = oat_optimum(100, 1.0);
  const auto b = oat_optimum(100, 0.25);
  CHECK(b.xi2_min == doctest::Approx(a.xi2_min).epsilon(1e-9));
  CHECK(b.t_opt == doctest::Approx(4.0 * a.t_opt).epsilon(1e-6));
  CHECK(a.t_opt <= a.t_min + 1e-9);
  CHECK_THROWS_AS(oat_optimum(3, 1.0), ConfigError);
  CHECK_THROWS_AS(oat_optimum(10, 0.0), ConfigError);
}

TEST_CASE("xi2_min t_min^2 settles along the OAT family") {
  std::vector<double> prod;
  for (int N : {1000, 4000, 16000}) {
    const auto o = oat_optimum(N, 1.0 / N);
    prod.push_back(o.xi2_min * o.t_min * o.t_min);
  }
  const double d1 = std::abs(prod[1] / prod[0] - 1.0);
  const double d2 = std::abs(prod[2] / prod[1] - 1.0);
  CHECK(d2 < d1);
  CHECK(d2 < 0.05);
}

TEST_CASE("oat time series") {
  const RotorModel r{20, 0.1};
  std::vector<double> t = {0.0, 0.5, 1.0};
  const auto ts = oat_quench(r, t);
  REQUIRE(ts.points.size() == 3);
  CHECK(ts.points[0].xi2 == doctest::Approx(1.0));
  CHECK(ts.points[2].xi2 < 1.0);
  CHECK(ts.metadata["solver"] == "oat");
}

TEST_CASE("optimum times from the grid and the shift between them") {
  const auto opt = oat_optimum(64, 1.0);
  const double dt = opt.t_min / 50.0;
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(dt * i);
  const auto grid = find_optimum(oat_quench(RotorModel{64, 1.0}, t));
  CHECK(std::abs(grid.t_min - opt.t_min) < 0.1 * dt);
  CHECK(std::abs(grid.t_opt - opt.t_opt) < 0.1 * dt);
  // m_x decay moves t_opt ahead of t_min by about 0.35 N^-1/3 of t_min
  double prev = 1.0;
  for (int N : {64, 512, 4096, 32768}) {
    const auto o = oat_optimum(N, 1.0);
    const double rel = (o.t_min - o.t_opt) / o.t_min;
    CHECK(rel > 0.0);
    CHECK(rel < prev);
    CHECK(rel * std::cbrt(N) == doctest::Approx(0.355).epsilon(0.05));
    prev = rel;
  }
}
