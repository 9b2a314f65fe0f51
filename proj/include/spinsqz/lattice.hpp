#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinsqz {

/// Periodic Lx x Ly square lattice. Sites are numbered i = x + Lx*y.
struct LatticeGeometry {
  int Lx = 0;
  int Ly = 0;

  static LatticeGeometry square(int L);
  static LatticeGeometry rectangle(int Lx, int Ly);

  int size() const { return Lx * Ly; }
  int site(int x, int y) const;
  std::array<int, 2> coords(int i) const;
  /// Minimum-image displacement r_j - r_i with components in (-L/2, L/2].
  std::array<int, 2> displacement(int i, int j) const;
  double distance(int i, int j) const;
};

/// Wraps an integer displacement component into (-L/2, L/2].
int min_image(int d, int L);

enum class CouplingFamily { NearestNeighbor, PowerLaw, RydbergDressed, AllToAll };

std::string to_string(CouplingFamily f);
CouplingFamily parse_family(const std::string& name);

struct CouplingSpec {
  CouplingFamily family = CouplingFamily::NearestNeighbor;
  double J = 1.0;
  double alpha = 3.0;  // power-law exponent
  double rb = 0.0;     // blockade radius, lattice units

  /// Throws ConfigError on J <= 0, alpha <= 0 or rb < 0.
  void validate() const;
  /// Coupling at minimum-image distance r > 0.
  double at_distance(double r) const;
};

struct Bond {
  int i;
  int j;
  double J;
};

/// Dense symmetric couplings with zero diagonal. Translation invariant by
/// construction; J0 is the common row sum.
struct CouplingMatrix {
  LatticeGeometry geometry;
  CouplingSpec spec;
  Eigen::MatrixXd values;
  double J0 = 0.0;

  int size() const { return geometry.size(); }
  /// Nonzero pairs with i < j.
  std::vector<Bond> bonds() const;
  /// Sum_{i<j} J_ij.
  double pair_sum() const;
  bool is_translation_invariant(double tol = 1e-12) const;
};

CouplingMatrix build_couplings(const LatticeGeometry& geometry, const CouplingSpec& spec);

struct Wavevector {
  int nx;
  int ny;
  double kx;
  double ky;
  double Jk;
};

/// J_k on the Lx x Ly reciprocal grid; entry 0 is k = 0.
struct MomentumGrid {
  LatticeGeometry geometry;
  std::vector<Wavevector> k;
};

MomentumGrid fourier_coupling(const CouplingMatrix& cm);

/// One CSV row per site.
void write_couplings_csv(const CouplingMatrix& cm, const std::string& path);

}  // namespace spinsqz
