#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spinsqz/collective.hpp"
#include "spinsqz/lattice.hpp"

namespace spinsqz {

struct ClassicalConfig {
  double t = 0.0;
  std::vector<Vec3> s;  // sampled components are +-1/2, so s_i^2 = 3/4
};

/// Nonzero couplings per site, CSR layout.
struct NeighborList {
  int N = 0;
  std::vector<std::size_t> offset;
  std::vector<int> site;
  std::vector<double> J;

  static NeighborList from(const CouplingMatrix& cm);
};

/// Discrete Wigner sample of the x coherent state: s^x = 1/2, s^y and s^z
/// independently +-1/2.
ClassicalConfig sample_initial(int N, std::mt19937_64& rng);

/// Local fields B_i = sum_j J_ij (s_j^x, s_j^y, Delta s_j^z).
void local_fields(const std::vector<Vec3>& s, const NeighborList& nb, double delta, std::vector<Vec3>& B);

/// One RK4 step of ds_i/dt = s_i x B_i.
void eom_step(ClassicalConfig& c, const NeighborList& nb, double delta, double dt);

/// H_cl = -sum_{i<j} J_ij (s^x s^x + s^y s^y + Delta s^z s^z).
double classical_energy(const ClassicalConfig& c, const NeighborList& nb, double delta);

/// splitmix64 of (master, index): independent stream seed per trajectory.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

struct DtwaOptions {
  double dt = 0.01;
  int n_traj = 5000;
  std::uint64_t seed = 1;
  int blocks = 10;               // jackknife blocks
  double drift_tol = 1e-6;       // classical energy drift per unit time, relative
  int max_dt_halvings = 4;
};

/// Ensemble moments at `times`. Trajectories are split into contiguous blocks
/// accumulated in index order, so results do not depend on the thread count.
/// Fills m_x_err and xi2_err by block jackknife.
TimeSeries run_ensemble(const CouplingMatrix& cm, double delta, std::span<const double> times,
                        const DtwaOptions& opts = {});

}  // namespace spinsqz
