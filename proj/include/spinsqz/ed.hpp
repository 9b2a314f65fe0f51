#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinsqz/collective.hpp"
#include "spinsqz/lattice.hpp"
#include "spinsqz/sector_basis.hpp"

namespace spinsqz {

/// Compressed sparse row matrix, real symmetric.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }

  template <class T>
  void apply(const T* x, T* y) const {
    for (std::size_t r = 0; r < rows; ++r) {
      T acc{};
      for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += val[p] * x[col[p]];
      y[r] = acc;
    }
  }

  Eigen::MatrixXd to_dense() const;
};

/// H = -sum_{i<j} J_ij (Sx Sx + Sy Sy + Delta Sz Sz) restricted to one sector:
/// diagonal -Delta sum J_ij s_i s_j, flip-flop elements -J_ij/2.
CsrMatrix build_sector_matrix(const SectorBasis& basis, const std::vector<Bond>& bonds, double delta);

/// Upper bound on the bytes needed for one sector Hamiltonian.
std::size_t sector_memory_estimate(int N, int n_up, std::size_t n_bonds);

struct EdModel {
  int N = 0;
  double delta = 0.0;
  std::vector<SectorBasis> bases;  // indexed by n_up = 0..N
  std::vector<CsrMatrix> hams;
};

struct EdOptions {
  double max_gib = 2.0;  // memory guard for Hamiltonian storage
  int max_sites = 20;
};

/// All sectors. Throws ConfigError with the required byte count when the
/// memory guard would be exceeded.
EdModel build_ed_model(const CouplingMatrix& cm, double delta, const EdOptions& opts = {});

/// Single sector, for tower and thermal work.
CsrMatrix build_sector(const CouplingMatrix& cm, int n_up, double delta, const EdOptions& opts = {});

/// Pure state stored as one amplitude block per sector (index n_up).
struct SectorState {
  int N = 0;
  double t = 0.0;
  std::vector<Eigen::VectorXcd> blocks;

  double norm() const;
  std::vector<double> sector_weights() const;
};

/// |->_x>^N: amplitude 2^{-N/2} on every basis state.
SectorState css_state(const EdModel& model);

struct KrylovOptions {
  int dim = 30;
  double tol = 1e-12;
  int max_halvings = 10;
};

struct EvolveStats {
  int halvings = 0;
  double max_error = 0.0;
};

/// Advances every sector by t_step with a Lanczos exponential; steps whose
/// error estimate exceeds tol are split in halves, at most max_halvings deep.
EvolveStats evolve(SectorState& state, const EdModel& model, double t_step,
                   const KrylovOptions& opts = {});

double energy(const SectorState& state, const EdModel& model);

/// Exact collective moments from J+/- maps between adjacent sectors.
CollectiveMoments measure_collective(const SectorState& state, const EdModel& model);

/// J+ applied to the block of sector n_up, landing in sector n_up + 1.
Eigen::VectorXcd apply_raise(const SectorBasis& from, const SectorBasis& to, const Eigen::VectorXcd& v);
Eigen::VectorXcd apply_lower(const SectorBasis& from, const SectorBasis& to, const Eigen::VectorXcd& v);

/// Lowest `count` distinct levels of a sector (degenerate copies counted once,
/// fewer returned if the sector has fewer). Lanczos with full
/// reorthogonalization, dense below 400 states.
std::vector<double> lowest_eigenvalues(const CsrMatrix& H, int count, double rel_tol = 1e-9,
                                       std::uint64_t seed = 12345);

struct SectorLevels {
  double jz;
  std::vector<double> energies;  // ascending distinct levels, lowest `count` of the sector
};

/// Lowest levels of every Jz sector.
std::vector<SectorLevels> tower_energies(const CouplingMatrix& cm, double delta, int count = 1,
                                         const EdOptions& opts = {});

std::vector<std::pair<double, double>> tower_minima(const std::vector<SectorLevels>& levels);

struct EdQuenchDiagnostics {
  double max_norm_drift = 0.0;
  double max_rel_energy_drift = 0.0;
  double max_weight_drift = 0.0;
  double max_transverse_mean = 0.0;  // max |<Jy>|, |<Jz>| over the run
  double energy0 = 0.0;
  int halvings = 0;
};

struct EdQuenchResult {
  TimeSeries series;
  EdQuenchDiagnostics diagnostics;
};

/// CSS quench sampled at `times` (ascending, starting at or after 0), with
/// internal steps no longer than max_step.
EdQuenchResult ed_quench(const CouplingMatrix& cm, double delta, std::span<const double> times,
                         double max_step = 0.1, const EdOptions& opts = {},
                         const KrylovOptions& kopts = {});

}  // namespace spinsqz
