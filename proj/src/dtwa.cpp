#include "spinsqz/dtwa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "spinsqz/error.hpp"

namespace spinsqz {

NeighborList NeighborList::from(const CouplingMatrix& cm) {
  NeighborList nb;
  nb.N = cm.size();
  nb.offset.push_back(0);
  for (int i = 0; i < nb.N; ++i) {
    for (int j = 0; j < nb.N; ++j) {
      const double J = cm.values(i, j);
      if (i != j && J != 0.0) {
        nb.site.push_back(j);
        nb.J.push_back(J);
      }
    }
    nb.offset.push_back(nb.site.size());
  }
  return nb;
}

ClassicalConfig sample_initial(int N, std::mt19937_64& rng) {
  ClassicalConfig c;
  c.s.resize(N);
  for (auto& v : c.s) {
    const auto bits = rng();
    v = Vec3(0.5, (bits & 1u) ? 0.5 : -0.5, (bits & 2u) ? 0.5 : -0.5);
  }
  return c;
}

void local_fields(const std::vector<Vec3>& s, const NeighborList& nb, double delta, std::vector<Vec3>& B) {
  B.resize(s.size());
  for (int i = 0; i < nb.N; ++i) {
    double bx = 0.0, by = 0.0, bz = 0.0;
    for (std::size_t p = nb.offset[i]; p < nb.offset[i + 1]; ++p) {
      const Vec3& sj = s[nb.site[p]];
      bx += nb.J[p] * sj.x();
      by += nb.J[p] * sj.y();
      bz += nb.J[p] * sj.z();
    }
    B[i] = Vec3(bx, by, delta * bz);
  }
}

void eom_step(ClassicalConfig& c, const NeighborList& nb, double delta, double dt) {
  const std::size_t N = c.s.size();
  thread_local std::vector<Vec3> B, k1, k2, k3, k4, tmp;
  for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->resize(N);
  auto deriv = [&](const std::vector<Vec3>& s, std::vector<Vec3>& k) {
    local_fields(s, nb, delta, B);
    for (std::size_t i = 0; i < N; ++i) k[i] = s[i].cross(B[i]);
  };
  deriv(c.s, k1);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = c.s[i] + 0.5 * dt * k1[i];
  deriv(tmp, k2);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = c.s[i] + 0.5 * dt * k2[i];
  deriv(tmp, k3);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = c.s[i] + dt * k3[i];
  deriv(tmp, k4);
  for (std::size_t i = 0; i < N; ++i) c.s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  c.t += dt;
}

double classical_energy(const ClassicalConfig& c, const NeighborList& nb, double delta) {
  double e = 0.0;
  for (int i = 0; i < nb.N; ++i) {
    for (std::size_t p = nb.offset[i]; p < nb.offset[i + 1]; ++p) {
      const Vec3& a = c.s[i];
      const Vec3& b = c.s[nb.site[p]];
      e -= nb.J[p] * (a.x() * b.x() + a.y() * b.y() + delta * a.z() * b.z());
    }
  }
  return 0.5 * e;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ index);
}

namespace {

/// Sums of J_a and J_a J_b (upper triangle) over trajectories, per output time.
struct Accumulator {
  std::vector<std::array<double, 9>> sums;  // x y z xx yy zz xy xz yz
  long count = 0;

  explicit Accumulator(std::size_t n_times = 0) : sums(n_times, std::array<double, 9>{}) {}

  void add(std::size_t k, const Vec3& J) {
    auto& a = sums[k];
    a[0] += J.x();
    a[1] += J.y();
    a[2] += J.z();
    a[3] += J.x() * J.x();
    a[4] += J.y() * J.y();
    a[5] += J.z() * J.z();
    a[6] += J.x() * J.y();
    a[7] += J.x() * J.z();
    a[8] += J.y() * J.z();
  }

  void merge(const Accumulator& o) {
    for (std::size_t k = 0; k < sums.size(); ++k) {
      for (int c = 0; c < 9; ++c) sums[k][c] += o.sums[k][c];
    }
    count += o.count;
  }

  CollectiveMoments moments(std::size_t k, int N, double t) const {
    const auto& a = sums[k];
    const double n = static_cast<double>(count);
    CollectiveMoments m;
    m.t = t;
    m.N = N;
    m.mean = Vec3(a[0], a[1], a[2]) / n;
    m.second << a[3], a[6], a[7], a[6], a[4], a[8], a[7], a[8], a[5];
    m.second /= n;
    return m;
  }
};

Vec3 total_spin(const ClassicalConfig& c) {
  Vec3 J = Vec3::Zero();
  for (const auto& v : c.s) J += v;
  return J;
}

/// Integrates to each output time with uniform substeps no longer than dt.
template <class Visit>
void integrate(ClassicalConfig& c, const NeighborList& nb, double delta, std::span<const double> times,
               double dt, Visit&& visit) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double span = times[k] - c.t;
    if (span < -1e-12) throw ConfigError("DTWA output times must be ascending and >= 0");
    if (span > 1e-12) {
      const int steps = static_cast<int>(std::ceil(span / dt - 1e-9));
      const double h = span / steps;
      for (int n = 0; n < steps; ++n) eom_step(c, nb, delta, h);
    }
    c.t = times[k];
    visit(k, c);
  }
}

}  // namespace

TimeSeries run_ensemble(const CouplingMatrix& cm, double delta, std::span<const double> times,
                        const DtwaOptions& opts) {
  if (opts.n_traj < 100) throw ConfigError("DTWA needs n_traj >= 100");
  if (opts.blocks < 2 || opts.n_traj < opts.blocks) throw ConfigError("DTWA needs 2 <= blocks <= n_traj");
  if (!(opts.dt > 0.0)) throw ConfigError("DTWA dt must be positive");
  const int N = cm.size();
  const auto nb = NeighborList::from(cm);
  TimeSeries ts;

  // pilot trajectory: classical energy drift decides the step
  double dt = opts.dt;
  const double scale = std::max(1e-300, 0.25 * cm.pair_sum());
  for (int h = 0;; ++h) {
    std::mt19937_64 rng(trajectory_seed(opts.seed, 0));
    auto c = sample_initial(N, rng);
    const double e0 = classical_energy(c, nb, delta);
    double worst = 0.0;
    integrate(c, nb, delta, times, dt, [&](std::size_t, const ClassicalConfig& cc) {
      if (cc.t > 0.0) {
        const double drift = std::abs(classical_energy(cc, nb, delta) - e0) / scale;
        worst = std::max(worst, drift / std::max(cc.t, 1.0));
      }
    });
    if (worst <= opts.drift_tol) break;
    if (h >= opts.max_dt_halvings) {
      throw NumericalError("DTWA energy drift persists after halving dt " +
                           std::to_string(opts.max_dt_halvings) + " times");
    }
    std::ostringstream msg;
    msg << "classical energy drift " << worst << " per unit time at dt=" << dt << ", halving dt";
    ts.warnings.push_back(msg.str());
    dt *= 0.5;
  }

  const int B = opts.blocks;
  std::vector<Accumulator> block(B, Accumulator(times.size()));
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < B; ++b) {
    const long lo = static_cast<long>(opts.n_traj) * b / B;
    const long hi = static_cast<long>(opts.n_traj) * (b + 1) / B;
    for (long traj = lo; traj < hi; ++traj) {
      std::mt19937_64 rng(trajectory_seed(opts.seed, static_cast<std::uint64_t>(traj)));
      auto c = sample_initial(N, rng);
      integrate(c, nb, delta, times, dt, [&](std::size_t k, const ClassicalConfig& cc) {
        block[b].add(k, total_spin(cc));
      });
      ++block[b].count;
    }
  }
  Accumulator all(times.size());
  for (const auto& b : block) all.merge(b);

  ts.points.reserve(times.size());
  ts.m_x_err.resize(times.size());
  ts.xi2_err.resize(times.size());
  std::vector<std::string> scratch;
  for (std::size_t k = 0; k < times.size(); ++k) {
    ts.points.push_back(squeezing_point_or_nan(all.moments(k, N, times[k]), ts.warnings));
    std::vector<double> mx(B), xi(B);
    for (int b = 0; b < B; ++b) {
      Accumulator loo(1);
      loo.count = all.count - block[b].count;
      for (int c = 0; c < 9; ++c) loo.sums[0][c] = all.sums[k][c] - block[b].sums[k][c];
      const auto p = squeezing_point_or_nan(loo.moments(0, N, times[k]), scratch);
      mx[b] = p.m_x;
      xi[b] = p.xi2;
    }
    auto jack = [B](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x / B;
      double acc = 0.0;
      for (double x : v) acc += (x - mean) * (x - mean);
      return std::sqrt((B - 1.0) / B * acc);
    };
    ts.m_x_err[k] = jack(mx);
    ts.xi2_err[k] = jack(xi);
  }
  ts.metadata["solver"] = "dtwa";
  ts.metadata["N"] = N;
  ts.metadata["delta"] = delta;
  ts.metadata["n_traj"] = opts.n_traj;
  ts.metadata["seed"] = opts.seed;
  ts.metadata["dt"] = dt;
  ts.metadata["blocks"] = B;
  return ts;
}

}  // namespace spinsqz
