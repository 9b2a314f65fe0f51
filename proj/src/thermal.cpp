#include "spinsqz/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <lapacke.h>

#include "spinsqz/error.hpp"

namespace spinsqz {

namespace {

std::vector<Bond> all_pairs(int N) {
  std::vector<Bond> b;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) b.push_back({i, j, 1.0});
  }
  return b;
}

/// Eigenpairs of a dense symmetric matrix; Z is left empty without vectors.
void eigh(Eigen::MatrixXd& A, std::vector<double>& w, Eigen::MatrixXd& Z, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  w.resize(n);
  if (n == 0) return;
  if (!vectors) {
    const lapack_int info = LAPACKE_dsyevd_2stage(LAPACK_COL_MAJOR, 'N', 'U', n, A.data(), n, w.data());
    if (info != 0) throw NumericalError("dsyevd failed with info " + std::to_string(info));
    return;
  }
  Z.resize(n, n);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, A.data(), n, 0.0, 0.0, 0, 0,
                                         0.0, &found, w.data(), Z.data(), n, isuppz.data());
  if (info != 0 || found != n) throw NumericalError("dsyevr failed with info " + std::to_string(info));
}

/// <J^2> on each column of Z (full sector coordinates).
void add_j2(const SectorBasis& basis, const Eigen::MatrixXd& Z, int N, std::vector<double>& j2) {
  // J^2 = 3N/4 - 2 H_heis with H_heis = -sum_{i<j} S_i . S_j
  const CsrMatrix heis = build_sector_matrix(basis, all_pairs(N), 1.0);
  Eigen::VectorXd tmp(Z.rows());
  for (Eigen::Index k = 0; k < Z.cols(); ++k) {
    heis.apply(Z.col(k).data(), tmp.data());
    j2.push_back(0.75 * N - 2.0 * Z.col(k).dot(tmp));
  }
}

ThermalSector diagonalize(const SectorBasis& basis, const CsrMatrix& H, int N, bool vectors) {
  ThermalSector s;
  s.n_up = basis.n_up();
  s.multiplicity = (2 * basis.n_up() == N) ? 1 : 2;
  s.sz = basis.sz();
  Eigen::MatrixXd Z;
  if (2 * basis.n_up() != N) {
    Eigen::MatrixXd A = H.to_dense();
    eigh(A, s.energies, Z, vectors);
    A.resize(0, 0);
    if (vectors) add_j2(basis, Z, N, s.j2);
    return s;
  }
  // Jz = 0: split into even and odd combinations under the global spin flip P
  const std::size_t dim = basis.dim();
  const std::uint32_t mask = (N == 32) ? ~std::uint32_t{0} : ((std::uint32_t{1} << N) - 1);
  std::vector<std::size_t> partner(dim), rep(dim);
  std::vector<std::size_t> reps;
  for (std::size_t a = 0; a < dim; ++a) {
    partner[a] = basis.index(~basis.state(a) & mask);
    if (a < partner[a]) {
      rep[a] = reps.size();
      reps.push_back(a);
    }
  }
  for (std::size_t a = 0; a < dim; ++a) {
    if (a > partner[a]) rep[a] = rep[partner[a]];
  }
  const Eigen::Index h = static_cast<Eigen::Index>(reps.size());
  for (int parity : {+1, -1}) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(h, h);
    for (Eigen::Index r = 0; r < h; ++r) {
      const std::size_t a = reps[r];
      for (std::size_t p = H.row_ptr[a]; p < H.row_ptr[a + 1]; ++p) {
        const std::size_t b = H.col[p];
        A(r, rep[b]) += (b < partner[b]) ? H.val[p] : parity * H.val[p];
      }
    }
    std::vector<double> w;
    eigh(A, w, Z, vectors);
    A.resize(0, 0);
    s.energies.insert(s.energies.end(), w.begin(), w.end());
    if (vectors) {
      Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim, h);
      const double c = 1.0 / std::sqrt(2.0);
      for (Eigen::Index r = 0; r < h; ++r) {
        full.row(reps[r]) = c * Z.row(r);
        full.row(partner[reps[r]]) = parity * c * Z.row(r);
      }
      Z.resize(0, 0);
      add_j2(basis, full, N, s.j2);
    }
  }
  return s;
}

}  // namespace

ThermalResult thermal_solve(const CouplingMatrix& cm, double delta, const ThermalOptions& opts) {
  const int N = cm.size();
  if (N > 16) throw ConfigError("thermal solver limited to N <= 16, got " + std::to_string(N));
  ThermalResult r;
  r.N = N;
  r.delta = delta;
  r.E_css = -0.25 * cm.pair_sum();
  const int half = N / 2;
  r.sectors.resize(half + 1);
  // largest sectors first keeps the peak memory at one dense block per worker
  for (int n = half; n >= 0; --n) {
    const SectorBasis basis(N, n);
    const auto H = build_sector(cm, n, delta, opts.ed);
    r.sectors[n] = diagonalize(basis, H, N, opts.with_vectors);
  }
  r.E_ground = std::numeric_limits<double>::infinity();
  for (const auto& s : r.sectors) {
    for (double e : s.energies) r.E_ground = std::min(r.E_ground, e);
  }
  return r;
}

double ThermalResult::energy(double T) const {
  double z = 0.0;
  double e = 0.0;
  for (const auto& s : sectors) {
    for (double E : s.energies) {
      const double w = s.multiplicity * std::exp(-(E - E_ground) / T);
      z += w;
      e += w * E;
    }
  }
  return e / z;
}

double ThermalResult::var_jx(double T) const {
  double z = 0.0;
  double acc = 0.0;
  for (const auto& s : sectors) {
    if (s.j2.size() != s.energies.size()) throw ConfigError("thermal Var(Jx) needs eigenvectors");
    for (std::size_t k = 0; k < s.energies.size(); ++k) {
      const double w = s.multiplicity * std::exp(-(s.energies[k] - E_ground) / T);
      z += w;
      acc += w * (s.j2[k] - s.sz * s.sz);
    }
  }
  return 0.5 * acc / z / N;
}

double ThermalResult::temperature_at(double E, double lo, double hi, double rel_tol) const {
  const double e_lo = energy(lo);
  const double e_hi = energy(hi);
  if (E < e_lo || E > e_hi) {
    throw ConfigError("target energy " + std::to_string(E) + " outside thermal bracket [" +
                      std::to_string(e_lo) + ", " + std::to_string(e_hi) + "]");
  }
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (energy(mid) < E) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

double ThermalResult::t_css() const {
  if (E_css < E_ground) {
    throw ConfigError("CSS energy below the ground-state energy: no thermal state matches");
  }
  return temperature_at(E_css);
}

}  // namespace spinsqz
