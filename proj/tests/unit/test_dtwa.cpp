#include <doctest.h>

#include <cmath>

#include "spinsqz/dtwa.hpp"
#include "spinsqz/ed.hpp"
#include "spinsqz/error.hpp"
#include "spinsqz/rotor_oat.hpp"

using namespace spinsqz;

namespace {

CouplingMatrix nn(int Lx, int Ly) { return build_couplings(LatticeGeometry::rectangle(Lx, Ly), CouplingSpec{}); }

std::vector<double> grid(double dt, int n) {
  std::vector<double> t;
  for (int i = 0; i <= n; ++i) t.push_back(dt * i);
  return t;
}

Vec3 total(const ClassicalConfig& c) {
  Vec3 s = Vec3::Zero();
  for (const auto& v : c.s) s += v;
  return s;
}

}  // namespace

TEST_CASE("initial sampling") {
  std::mt19937_64 rng(7);
  const int N = 16, M = 20000;
  double sy = 0.0, sz = 0.0, syz = 0.0;
  for (int m = 0; m < M; ++m) {
    const auto c = sample_initial(N, rng);
    for (const auto& v : c.s) {
      CHECK(v.x() == 0.5);
      CHECK(std::abs(v.y()) == 0.5);
      CHECK(std::abs(v.z()) == 0.5);
    }
    sy += c.s[3].y();
    sz += c.s[3].z();
    syz += c.s[3].y() * c.s[5].z();
  }
  // sums of M independent +-1/2 draws: standard deviation sqrt(M)/2
  CHECK(std::abs(sy) < 5.0 * std::sqrt(M) / 2);
  CHECK(std::abs(sz) < 5.0 * std::sqrt(M) / 2);
  CHECK(std::abs(syz) < 5.0 * std::sqrt(M) / 4);
}

TEST_CASE("neighbour list") {
  const auto cm = nn(4, 4);
  const auto nb = NeighborList::from(cm);
  CHECK(nb.N == 16);
  for (int i = 0; i < 16; ++i) {
    CHECK(nb.offset[i + 1] - nb.offset[i] == 4);
    double row = 0.0;
    for (std::size_t p = nb.offset[i]; p < nb.offset[i + 1]; ++p) row += nb.J[p];
    CHECK(row == doctest::Approx(cm.J0));
  }
}

TEST_CASE("equations of motion conserve invariants") {
  const auto cm = build_couplings(LatticeGeometry::square(4), {CouplingFamily::RydbergDressed, 1.0, 3.0, 1.5});
  const auto nb = NeighborList::from(cm);
  std::mt19937_64 rng(3);
  // RK4 is not norm preserving: keep J0 dt small
  const double dt = 0.02 / cm.J0;
  const int steps = static_cast<int>(5.0 / dt);
  for (double d : {-0.5, 0.5}) {
    auto c = sample_initial(16, rng);
    const double e0 = classical_energy(c, nb, d);
    const double z0 = total(c).z();
    for (int n = 0; n < steps; ++n) eom_step(c, nb, d, dt);
    for (const auto& v : c.s) CHECK(v.squaredNorm() == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(total(c).z() == doctest::Approx(z0).epsilon(1e-9));
    CHECK(classical_energy(c, nb, d) == doctest::Approx(e0).epsilon(1e-8));
  }
  SUBCASE("isotropic point conserves the total spin") {
    auto c = sample_initial(16, rng);
    const Vec3 s0 = total(c);
    for (int n = 0; n < steps; ++n) eom_step(c, nb, 1.0, dt);
    CHECK((total(c) - s0).norm() < 1e-9);
  }
}

TEST_CASE("trajectory seeds") {
  CHECK(trajectory_seed(1, 0) != trajectory_seed(1, 1));
  CHECK(trajectory_seed(1, 5) != trajectory_seed(2, 5));
  CHECK(trajectory_seed(9, 4) == trajectory_seed(9, 4));
}

TEST_CASE("ensemble determinism and errors") {
  const auto cm = nn(3, 3);
  const auto t = grid(0.2, 10);
  DtwaOptions o;
  o.n_traj = 500;
  const auto a = run_ensemble(cm, 0.5, t, o);
  const auto b = run_ensemble(cm, 0.5, t, o);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(a.points[k].xi2 == b.points[k].xi2);
    CHECK(a.points[k].m_x == b.points[k].m_x);
    CHECK(a.xi2_err[k] > 0.0);
  }
  CHECK(a.m_x_err[0] < 1e-12);
  CHECK(a.m_x_err.back() > 0.0);
  o.seed = 2;
  CHECK(run_ensemble(cm, 0.5, t, o).points.back().xi2 != a.points.back().xi2);
  CHECK(a.metadata["solver"] == "dtwa");
  CHECK(a.metadata["n_traj"] == 500);
}

TEST_CASE("isotropic ensemble is static") {
  const auto t = grid(0.5, 10);
  DtwaOptions o;
  o.n_traj = 200;
  const auto ts = run_ensemble(nn(4, 4), 1.0, t, o);
  for (const auto& p : ts.points) {
    CHECK(p.m_x == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p.xi2 == doctest::Approx(ts.points[0].xi2).epsilon(1e-7));
  }
}

TEST_CASE("all-to-all ensemble follows one-axis twisting") {
  const int N = 20;
  const auto cm = build_couplings(LatticeGeometry::rectangle(N, 1), {CouplingFamily::AllToAll, 1.0, 3.0, 0.0});
  const auto t = grid(0.02, 15);
  DtwaOptions o;
  o.n_traj = 4000;
  const auto d = run_ensemble(cm, 0.5, t, o);
  const auto oat = oat_quench(RotorModel{N, 0.25}, t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(std::abs(d.points[k].m_x - oat.points[k].m_x) < 1e-3);
    CHECK(std::abs(d.points[k].xi2 - oat.points[k].xi2) < 3.0 * d.xi2_err[k]);
  }
}

TEST_CASE("short-time agreement with ED on 3x4") {
  const auto cm = nn(3, 4);
  const auto t = grid(0.1, 20);
  const auto ed = ed_quench(cm, 0.5, t).series;
  DtwaOptions o;
  o.n_traj = 4000;
  const auto d = run_ensemble(cm, 0.5, t, o);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(std::abs(d.points[k].m_x - ed.points[k].m_x) < 0.005);
    if (t[k] <= 1.0) CHECK(std::abs(d.points[k].xi2 / ed.points[k].xi2 - 1.0) < 0.05);
  }
}

TEST_CASE("configuration errors") {
  const auto cm = nn(3, 3);
  const auto t = grid(0.1, 3);
  DtwaOptions o;
  o.n_traj = 50;
  CHECK_THROWS_WITH_AS(run_ensemble(cm, 0.5, t, o), "DTWA needs n_traj >= 100", ConfigError);
  o.n_traj = 200;
  o.blocks = 1;
  CHECK_THROWS_AS(run_ensemble(cm, 0.5, t, o), ConfigError);
  o.blocks = 10;
  const std::vector<double> bad = {0.0, 0.3, 0.2};
  CHECK_THROWS_AS(run_ensemble(cm, 0.5, bad, o), ConfigError);
}

TEST_CASE("step control") {
  const auto cm = nn(3, 3);
  const auto t = grid(1.0, 5);
  DtwaOptions o;
  o.n_traj = 100;
  o.dt = 0.2;
  o.drift_tol = 1e-7;
  const auto ts = run_ensemble(cm, 0.5, t, o);
  REQUIRE(!ts.warnings.empty());
  CHECK(ts.warnings[0].find("classical energy drift") == 0);
  CHECK(ts.metadata["dt"].get<double>() < 0.2);
  o.drift_tol = 1e-300;
  o.max_dt_halvings = 1;
  CHECK_THROWS_AS(run_ensemble(cm, 0.5, t, o), NumericalError);
}

TEST_CASE("two spins against the exact pair") {
  const auto cm = build_couplings(LatticeGeometry::rectangle(2, 1), {CouplingFamily::AllToAll, 1.0, 3.0, 0.0});
  const auto t = grid(0.1, 10);
  DtwaOptions o;
  o.n_traj = 100000;
  const auto d = run_ensemble(cm, 0.5, t, o);
  for (std::size_t k = 0; k < t.size(); ++k) {
    // exact: <Jx> = cos((1 - Delta) t / 2)
    const double exact = std::cos(0.25 * t[k]);
    CHECK(std::abs(2.0 * d.points[k].m_x / exact - 1.0) < 0.02);
  }
}

TEST_CASE("precession sense matches ED") {
  const auto cm = nn(4, 4);
  const std::vector<double> t = {0.0, 0.05, 0.1, 0.15, 0.2};
  const auto ed = ed_quench(cm, 0.5, t).series;
  DtwaOptions o;
  o.n_traj = 4000;
  const auto d = run_ensemble(cm, 0.5, t, o);
  for (std::size_t k = 1; k < t.size(); ++k) {
    CHECK(std::abs(ed.points[k].cov12) > 1e-4);
    CHECK(std::signbit(d.points[k].cov12) == std::signbit(ed.points[k].cov12));
  }
}

TEST_CASE("isotropic all-to-all trajectories keep their total spin") {
  const int N = 12;
  const auto cm = build_couplings(LatticeGeometry::rectangle(N, 1), {CouplingFamily::AllToAll, 1.0, 3.0, 0.0});
  const auto nb = NeighborList::from(cm);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    auto c = sample_initial(N, rng);
    const Vec3 s0 = total(c);
    for (int n = 0; n < 1000; ++n) eom_step(c, nb, 1.0, 0.005);
    CHECK(total(c).norm() == doctest::Approx(s0.norm()).epsilon(1e-9));
    CHECK(total(c).z() == doctest::Approx(s0.z()).epsilon(1e-9));
  }
}

#ifdef _OPENMP
#include <omp.h>

TEST_CASE("results do not depend on the thread count") {
  const auto cm = nn(3, 3);
  const auto t = grid(0.3, 6);
  DtwaOptions o;
  o.n_traj = 300;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = run_ensemble(cm, 0.5, t, o);
  omp_set_num_threads(4);
  const auto b = run_ensemble(cm, 0.5, t, o);
  omp_set_num_threads(saved);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(a.points[k].xi2 == b.points[k].xi2);
    CHECK(a.xi2_err[k] == b.xi2_err[k]);
  }
}
#endif
