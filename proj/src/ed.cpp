#include "spinsqz/ed.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "spinsqz/error.hpp"

namespace spinsqz {

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) d(r, col[p]) += val[p];
  }
  return d;
}

CsrMatrix build_sector_matrix(const SectorBasis& basis, const std::vector<Bond>& bonds, double delta) {
  CsrMatrix m;
  m.rows = basis.dim();
  m.row_ptr.reserve(m.rows + 1);
  m.row_ptr.push_back(0);
  for (std::size_t a = 0; a < m.rows; ++a) {
    const std::uint32_t s = basis.state(a);
    double diag = 0.0;
    for (const auto& b : bonds) {
      const bool up_i = (s >> b.i) & 1u;
      const bool up_j = (s >> b.j) & 1u;
      if (up_i == up_j) {
        diag -= 0.25 * delta * b.J;
      } else {
        diag += 0.25 * delta * b.J;
        const std::uint32_t flipped = s ^ ((std::uint32_t{1} << b.i) | (std::uint32_t{1} << b.j));
        m.col.push_back(static_cast<std::uint32_t>(basis.index(flipped)));
        m.val.push_back(-0.5 * b.J);
      }
    }
    if (diag != 0.0) {
      m.col.push_back(static_cast<std::uint32_t>(a));
      m.val.push_back(diag);
    }
    m.row_ptr.push_back(m.val.size());
  }
  return m;
}

std::size_t sector_memory_estimate(int N, int n_up, std::size_t n_bonds) {
  const std::size_t dim = binomial(N, n_up);
  return dim * (1 + n_bonds) * (sizeof(std::uint32_t) + sizeof(double)) +
         (dim + 1) * sizeof(std::size_t) + dim * sizeof(std::uint32_t);
}

namespace {

void check_size(int N, const EdOptions& opts) {
  if (N > opts.max_sites) {
    throw ConfigError("ED limited to N <= " + std::to_string(opts.max_sites) + " sites, got " +
                      std::to_string(N));
  }
}

}  // namespace

EdModel build_ed_model(const CouplingMatrix& cm, double delta, const EdOptions& opts) {
  const int N = cm.size();
  check_size(N, opts);
  const auto bonds = cm.bonds();
  std::size_t bytes = 0;
  for (int n = 0; n <= N; ++n) bytes += sector_memory_estimate(N, n, bonds.size());
  const double limit = opts.max_gib * 1024.0 * 1024.0 * 1024.0;
  if (static_cast<double>(bytes) > limit) {
    std::ostringstream msg;
    msg << "ED memory estimate " << bytes << " bytes exceeds --max-gib " << opts.max_gib;
    throw ConfigError(msg.str());
  }
  EdModel model;
  model.N = N;
  model.delta = delta;
  model.bases.reserve(N + 1);
  for (int n = 0; n <= N; ++n) model.bases.emplace_back(N, n);
  model.hams.resize(N + 1);
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n <= N; ++n) model.hams[n] = build_sector_matrix(model.bases[n], bonds, delta);
  return model;
}

CsrMatrix build_sector(const CouplingMatrix& cm, int n_up, double delta, const EdOptions& opts) {
  const int N = cm.size();
  check_size(N, opts);
  const auto bonds = cm.bonds();
  const auto bytes = sector_memory_estimate(N, n_up, bonds.size());
  if (static_cast<double>(bytes) > opts.max_gib * 1024.0 * 1024.0 * 1024.0) {
    throw ConfigError("sector memory estimate " + std::to_string(bytes) + " bytes exceeds guard");
  }
  return build_sector_matrix(SectorBasis(N, n_up), bonds, delta);
}

double SectorState::norm() const {
  double acc = 0.0;
  for (const auto& b : blocks) acc += b.squaredNorm();
  return std::sqrt(acc);
}

std::vector<double> SectorState::sector_weights() const {
  std::vector<double> w;
  w.reserve(blocks.size());
  for (const auto& b : blocks) w.push_back(b.squaredNorm());
  return w;
}

SectorState css_state(const EdModel& model) {
  SectorState s;
  s.N = model.N;
  const double amp = std::pow(2.0, -0.5 * model.N);
  for (const auto& basis : model.bases) {
    s.blocks.push_back(Eigen::VectorXcd::Constant(basis.dim(), std::complex<double>(amp, 0.0)));
  }
  return s;
}

namespace {

/// One Lanczos-exponential step; returns the a posteriori error estimate.
double krylov_step(const CsrMatrix& H, Eigen::VectorXcd& psi, double dt, const KrylovOptions& o) {
  const Eigen::Index n = psi.size();
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return 0.0;
  const int m = static_cast<int>(std::min<Eigen::Index>(o.dim, n));
  Eigen::MatrixXcd V(n, m);
  std::vector<double> alpha;
  std::vector<double> beta;
  V.col(0) = psi / beta0;
  Eigen::VectorXcd w(n);
  double beta_last = 0.0;
  int k = 0;
  for (int j = 0; j < m; ++j) {
    H.apply(V.col(j).data(), w.data());
    const double a = V.col(j).dot(w).real();
    alpha.push_back(a);
    w -= a * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
    const double b = w.norm();
    k = j + 1;
    beta_last = b;
    if (b < 1e-14 * (std::abs(a) + 1.0)) {
      beta_last = 0.0;  // invariant subspace: the step is exact
      break;
    }
    if (j + 1 < m) {
      beta.push_back(b);
      V.col(j + 1) = w / b;
    }
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) T(i, i) = alpha[i];
  for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const auto& Q = es.eigenvectors();
  Eigen::VectorXcd phase(k);
  for (int i = 0; i < k; ++i) phase(i) = std::polar(1.0, -es.eigenvalues()(i) * dt) * Q(0, i);
  const Eigen::VectorXcd c = Q.cast<std::complex<double>>() * phase;
  const double err = beta_last * std::abs(c(k - 1));
  psi = beta0 * (V.leftCols(k) * c);
  return err;
}

void step_sector(const CsrMatrix& H, Eigen::VectorXcd& psi, double dt, const KrylovOptions& o,
                 int depth, EvolveStats& stats) {
  Eigen::VectorXcd trial = psi;
  const double err = krylov_step(H, trial, dt, o);
  if (err <= o.tol) {
    psi = std::move(trial);
    stats.max_error = std::max(stats.max_error, err);
    return;
  }
  if (depth >= o.max_halvings) {
    throw NumericalError("Krylov propagator did not converge after " +
                         std::to_string(o.max_halvings) + " step halvings");
  }
  ++stats.halvings;
  step_sector(H, psi, 0.5 * dt, o, depth + 1, stats);
  step_sector(H, psi, 0.5 * dt, o, depth + 1, stats);
}

}  // namespace

EvolveStats evolve(SectorState& state, const EdModel& model, double t_step, const KrylovOptions& opts) {
  const int sectors = static_cast<int>(state.blocks.size());
  std::vector<EvolveStats> per(sectors);
  std::vector<std::string> errors(sectors);
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n < sectors; ++n) {
    try {
      step_sector(model.hams[n], state.blocks[n], t_step, opts, 0, per[n]);
    } catch (const NumericalError& e) {
      errors[n] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw NumericalError(e);
  }
  EvolveStats total;
  for (const auto& s : per) {
    total.halvings += s.halvings;
    total.max_error = std::max(total.max_error, s.max_error);
  }
  state.t += t_step;
  return total;
}

double energy(const SectorState& state, const EdModel& model) {
  double e = 0.0;
  for (std::size_t n = 0; n < state.blocks.size(); ++n) {
    Eigen::VectorXcd hv(state.blocks[n].size());
    model.hams[n].apply(state.blocks[n].data(), hv.data());
    e += state.blocks[n].dot(hv).real();
  }
  return e;
}

Eigen::VectorXcd apply_raise(const SectorBasis& from, const SectorBasis& to, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(to.dim());
  const int N = from.N();
  for (std::size_t a = 0; a < from.dim(); ++a) {
    const std::uint32_t s = from.state(a);
    for (int i = 0; i < N; ++i) {
      if (!((s >> i) & 1u)) out(to.index(s | (std::uint32_t{1} << i))) += v(a);
    }
  }
  return out;
}

Eigen::VectorXcd apply_lower(const SectorBasis& from, const SectorBasis& to, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(to.dim());
  const int N = from.N();
  for (std::size_t a = 0; a < from.dim(); ++a) {
    const std::uint32_t s = from.state(a);
    for (int i = 0; i < N; ++i) {
      if ((s >> i) & 1u) out(to.index(s & ~(std::uint32_t{1} << i))) += v(a);
    }
  }
  return out;
}

CollectiveMoments measure_collective(const SectorState& state, const EdModel& model) {
  const int N = state.N;
  std::vector<Eigen::VectorXcd> up(N + 1);    // J+ psi_n, lives in n+1
  std::vector<Eigen::VectorXcd> down(N + 1);  // J- psi_n, lives in n-1
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n <= N; ++n) {
    if (n < N) up[n] = apply_raise(model.bases[n], model.bases[n + 1], state.blocks[n]);
    if (n > 0) down[n] = apply_lower(model.bases[n], model.bases[n - 1], state.blocks[n]);
  }
  LadderExpectations e{};
  for (int n = 0; n <= N; ++n) {
    const double sz = model.bases[n].sz();
    const double w = state.blocks[n].squaredNorm();
    e.jz += sz * w;
    e.jz2 += sz * sz * w;
    if (n < N) {
      const auto ov = state.blocks[n + 1].dot(up[n]);
      e.jp += ov;
      e.jp_jz += (2.0 * sz + 1.0) * ov;
      e.jpjm_plus_jmjp += up[n].squaredNorm();
    }
    if (n > 0) e.jpjm_plus_jmjp += down[n].squaredNorm();
    if (n + 2 <= N) e.jp2 += down[n + 2].dot(up[n]);
  }
  return assemble_moments(e, N, state.t);
}

namespace {

constexpr double kLevelTol = 1e-8;

std::vector<double> distinct_levels(const std::vector<double>& sorted, int count) {
  std::vector<double> out;
  for (double e : sorted) {
    if (static_cast<int>(out.size()) == count) break;
    if (out.empty() || e - out.back() > kLevelTol * std::max(1.0, std::abs(e))) out.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<double> lowest_eigenvalues(const CsrMatrix& H, int count, double rel_tol, std::uint64_t seed) {
  const std::size_t n = H.rows;
  if (n <= 400) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return distinct_levels(std::vector<double>(ev.data(), ev.data() + ev.size()), count);
  }
  const int max_iter = static_cast<int>(std::min<std::size_t>(n, 600));
  for (int attempt = 0; attempt < 5; ++attempt) {
    std::mt19937_64 rng(seed + 7919 * attempt);
    std::normal_distribution<double> gauss;
    std::vector<Eigen::VectorXd> V;
    V.reserve(max_iter + 1);
    Eigen::VectorXd v0(n);
    for (std::size_t i = 0; i < n; ++i) v0(i) = gauss(rng);
    V.push_back(v0.normalized());
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(n);
    bool breakdown = false;
    for (int j = 0; j < max_iter; ++j) {
      H.apply(V[j].data(), w.data());
      const double a = V[j].dot(w);
      alpha.push_back(a);
      w -= a * V[j];
      if (j > 0) w -= beta[j - 1] * V[j - 1];
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) w -= V[i].dot(w) * V[i];
      }
      const double b = w.norm();
      const int k = j + 1;
      const bool last = (k == max_iter);
      breakdown = b < 1e-12 * (std::abs(a) + 1.0);
      if (k >= count && (k % 10 == 0 || last || breakdown)) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) T(i, i) = alpha[i];
        for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const auto& ev = es.eigenvalues();
        std::vector<double> levels;
        bool converged = true;
        for (int i = 0; i < k && static_cast<int>(levels.size()) < count; ++i) {
          const double theta = ev(i);
          const double resid = b * std::abs(es.eigenvectors()(k - 1, i));
          if (resid > rel_tol * std::max(1.0, std::abs(theta))) converged = false;
          if (levels.empty() || theta - levels.back() > kLevelTol * std::max(1.0, std::abs(theta))) {
            levels.push_back(theta);
          }
        }
        if (static_cast<int>(levels.size()) < count && !breakdown) converged = false;
        if (converged || breakdown) {
          if (breakdown && static_cast<int>(levels.size()) < count) break;  // reseed
          return levels;
        }
      }
      if (breakdown) break;
      beta.push_back(b);
      V.push_back(w / b);
    }
    if (!breakdown) throw NumericalError("Lanczos did not converge within " + std::to_string(max_iter) + " iterations");
  }
  throw NumericalError("Lanczos broke down repeatedly");
}

std::vector<SectorLevels> tower_energies(const CouplingMatrix& cm, double delta, int count,
                                         const EdOptions& opts) {
  const int N = cm.size();
  check_size(N, opts);
  std::vector<SectorLevels> out(N + 1);
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n <= N; ++n) {
    const auto H = build_sector(cm, n, delta, opts);
    out[n] = {n - 0.5 * N, lowest_eigenvalues(H, count, 1e-9, 1000 + n)};
  }
  return out;
}

std::vector<std::pair<double, double>> tower_minima(const std::vector<SectorLevels>& levels) {
  std::vector<std::pair<double, double>> out;
  for (const auto& l : levels) out.emplace_back(l.jz, l.energies.front());
  return out;
}

EdQuenchResult ed_quench(const CouplingMatrix& cm, double delta, std::span<const double> times,
                         double max_step, const EdOptions& opts, const KrylovOptions& kopts) {
  const auto model = build_ed_model(cm, delta, opts);
  auto state = css_state(model);
  EdQuenchResult res;
  auto& d = res.diagnostics;
  const auto w0 = state.sector_weights();
  d.energy0 = energy(state, model);
  res.series.points.reserve(times.size());
  for (double t : times) {
    if (t < state.t - 1e-12) throw ConfigError("ed_quench: times must be ascending and >= 0");
    while (state.t < t - 1e-12) {
      const double step = std::min(max_step, t - state.t);
      d.halvings += evolve(state, model, step, kopts).halvings;
    }
    state.t = t;
    const auto m = measure_collective(state, model);
    res.series.points.push_back(squeezing_point_or_nan(m, res.series.warnings));
    d.max_norm_drift = std::max(d.max_norm_drift, std::abs(state.norm() - 1.0));
    const double e = energy(state, model);
    d.max_rel_energy_drift =
        std::max(d.max_rel_energy_drift, std::abs(e - d.energy0) / std::max(1e-300, std::abs(d.energy0)));
    const auto w = state.sector_weights();
    for (std::size_t n = 0; n < w.size(); ++n) d.max_weight_drift = std::max(d.max_weight_drift, std::abs(w[n] - w0[n]));
    d.max_transverse_mean = std::max({d.max_transverse_mean, std::abs(m.mean.y()), std::abs(m.mean.z())});
  }
  res.series.metadata["solver"] = "ed";
  res.series.metadata["N"] = cm.size();
  res.series.metadata["delta"] = delta;
  res.series.metadata["diagnostics"] = {{"max_norm_drift", d.max_norm_drift},
                                        {"max_rel_energy_drift", d.max_rel_energy_drift},
                                        {"max_weight_drift", d.max_weight_drift},
                                        {"max_transverse_mean", d.max_transverse_mean},
                                        {"energy0", d.energy0},
                                        {"halvings", d.halvings}};
  return res;
}

}  // namespace spinsqz
