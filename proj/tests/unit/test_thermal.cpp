#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "spinsqz/error.hpp"
#include "spinsqz/thermal.hpp"

using namespace spinsqz;

namespace {

/// Full 2^N Hilbert space from Kronecker products, as an independent oracle.
struct DenseModel {
  Eigen::MatrixXd H;
  Eigen::MatrixXd J2mJz2;  // Jx^2 + Jy^2

  DenseModel(const CouplingMatrix& cm, double delta) {
    const int N = cm.size();
    const int d = 1 << N;
    H = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd Jx = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXcd Jy = Eigen::MatrixXcd::Zero(d, d);
    for (int s = 0; s < d; ++s) {
      for (int i = 0; i < N; ++i) {
        Jx(s ^ (1 << i), s) += 0.5;
        Jy(s ^ (1 << i), s) += ((s >> i) & 1) ? std::complex<double>(0, -0.5) : std::complex<double>(0, 0.5);
      }
      for (const auto& b : cm.bonds()) {
        const double zi = ((s >> b.i) & 1) ? 0.5 : -0.5;
        const double zj = ((s >> b.j) & 1) ? 0.5 : -0.5;
        H(s, s) -= b.J * delta * zi * zj;
        if (zi != zj) H(s ^ (1 << b.i) ^ (1 << b.j), s) -= 0.5 * b.J;
      }
    }
    J2mJz2 = Jx * Jx + (Jy * Jy).real();
  }

  double energy(double T) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const auto& e = es.eigenvalues();
    const Eigen::ArrayXd w = (-(e.array() - e.minCoeff()) / T).exp();
    return (w * e.array()).sum() / w.sum();
  }

  double var_jx(double T, int N) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const auto& e = es.eigenvalues();
    const Eigen::ArrayXd w = (-(e.array() - e.minCoeff()) / T).exp();
    const Eigen::MatrixXd o = es.eigenvectors().transpose() * J2mJz2 * es.eigenvectors();
    return (w * o.diagonal().array()).sum() / w.sum() / (2.0 * N);
  }
};

CouplingMatrix lattice(int Lx, int Ly, CouplingSpec spec = {}) {
  return build_couplings(LatticeGeometry::rectangle(Lx, Ly), spec);
}

}  // namespace

TEST_CASE("thermal traces match the full Hilbert space") {
  ThermalOptions opts;
  opts.with_vectors = true;
  const std::vector<CouplingMatrix> cms = {lattice(2, 2), lattice(3, 3), lattice(2, 4),
                                           lattice(3, 3, {CouplingFamily::RydbergDressed, 1.0, 3.0, 1.2})};
  for (const auto& cm : cms) {
    for (double d : {-0.5, 0.0, 0.5}) {
      const auto th = thermal_solve(cm, d, opts);
      const DenseModel dense(cm, d);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense.H, Eigen::EigenvaluesOnly);
      CHECK(th.E_ground == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-12));
      std::size_t count = 0;
      for (const auto& s : th.sectors) count += s.multiplicity * s.energies.size();
      CHECK(count == (std::size_t{1} << cm.size()));
      for (double T : {0.05, 0.3, 1.0, 4.0}) {
        CHECK(th.energy(T) == doctest::Approx(dense.energy(T)).epsilon(1e-10));
        CHECK(th.var_jx(T) == doctest::Approx(dense.var_jx(T, cm.size())).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("limits") {
  ThermalOptions opts;
  opts.with_vectors = true;
  const auto cm = lattice(2, 4);
  const auto th = thermal_solve(cm, 0.5, opts);
  // H is traceless and each spin contributes 1/4 to Var(Jx) at infinite T
  CHECK(std::abs(th.energy(1e8)) < 1e-6);
  CHECK(th.var_jx(1e8) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(th.energy(1e-4) == doctest::Approx(th.E_ground).epsilon(1e-9));
  CHECK(th.E_css == doctest::Approx(-cm.pair_sum() / 4));
  double prev = th.energy(0.01);
  for (double T = 0.02; T < 50.0; T *= 1.3) {
    const double e = th.energy(T);
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("CSS temperature") {
  const auto cm = lattice(3, 4);
  const auto th = thermal_solve(cm, 0.5);
  const double T = th.t_css();
  CHECK(T > 0.0);
  CHECK(th.energy(T) == doctest::Approx(th.E_css).epsilon(1e-6));
  CHECK(th.temperature_at(th.energy(0.7)) == doctest::Approx(0.7).epsilon(1e-5));
  CHECK_THROWS_AS(th.temperature_at(th.E_ground - 1.0), ConfigError);
  CHECK_THROWS_AS(th.temperature_at(1.0), ConfigError);
  CHECK_THROWS_WITH_AS(th.var_jx(1.0), "thermal Var(Jx) needs eigenvectors", ConfigError);
}

TEST_CASE("size guard") {
  CHECK_THROWS_AS(thermal_solve(lattice(3, 6), 0.5), ConfigError);
}
