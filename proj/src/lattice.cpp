#include "spinsqz/lattice.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "spinsqz/error.hpp"

namespace spinsqz {

LatticeGeometry LatticeGeometry::square(int L) { return rectangle(L, L); }

LatticeGeometry LatticeGeometry::rectangle(int Lx, int Ly) {
  if (Lx < 2 || Ly < 1) {
    throw ConfigError("lattice needs Lx >= 2 and Ly >= 1, got " + std::to_string(Lx) + "x" +
                      std::to_string(Ly));
  }
  return LatticeGeometry{Lx, Ly};
}

int LatticeGeometry::site(int x, int y) const {
  x = ((x % Lx) + Lx) % Lx;
  y = ((y % Ly) + Ly) % Ly;
  return x + Lx * y;
}

std::array<int, 2> LatticeGeometry::coords(int i) const { return {i % Lx, i / Lx}; }

int min_image(int d, int L) {
  d = ((d % L) + L) % L;
  // (-L/2, L/2]: for even L the point L/2 stays positive.
  if (2 * d > L) d -= L;
  return d;
}

std::array<int, 2> LatticeGeometry::displacement(int i, int j) const {
  auto [xi, yi] = coords(i);
  auto [xj, yj] = coords(j);
  return {min_image(xj - xi, Lx), min_image(yj - yi, Ly)};
}

double LatticeGeometry::distance(int i, int j) const {
  auto [dx, dy] = displacement(i, j);
  return std::hypot(static_cast<double>(dx), static_cast<double>(dy));
}

std::string to_string(CouplingFamily f) {
  switch (f) {
    case CouplingFamily::NearestNeighbor: return "nn";
    case CouplingFamily::PowerLaw: return "power-law";
    case CouplingFamily::RydbergDressed: return "rydberg";
    case CouplingFamily::AllToAll: return "all-to-all";
  }
  return "unknown";
}

CouplingFamily parse_family(const std::string& name) {
  if (name == "nn" || name == "nearest-neighbor") return CouplingFamily::NearestNeighbor;
  if (name == "power-law" || name == "powerlaw") return CouplingFamily::PowerLaw;
  if (name == "rydberg" || name == "rydberg-dressed") return CouplingFamily::RydbergDressed;
  if (name == "all-to-all" || name == "a2a") return CouplingFamily::AllToAll;
  throw ConfigError("unknown coupling family '" + name +
                    "' (expected nn, power-law, rydberg, all-to-all)");
}

void CouplingSpec::validate() const {
  if (!(J > 0.0)) throw ConfigError("coupling scale J must be > 0");
  if (family == CouplingFamily::PowerLaw && !(alpha > 0.0)) {
    throw ConfigError("power-law exponent alpha must be > 0");
  }
  if (family == CouplingFamily::RydbergDressed && !(rb >= 0.0)) {
    throw ConfigError("blockade radius rb must be >= 0");
  }
}

double CouplingSpec::at_distance(double r) const {
  switch (family) {
    case CouplingFamily::NearestNeighbor: return std::abs(r - 1.0) < 1e-12 ? J : 0.0;
    case CouplingFamily::PowerLaw: return J / std::pow(r, alpha);
    case CouplingFamily::RydbergDressed: {
      const double rb6 = std::pow(rb, 6);
      return J * (1.0 + rb6) / (std::pow(r, 6) + rb6);
    }
    case CouplingFamily::AllToAll: return J;
  }
  return 0.0;
}

std::vector<Bond> CouplingMatrix::bonds() const {
  std::vector<Bond> out;
  const int n = size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (values(i, j) != 0.0) out.push_back({i, j, values(i, j)});
    }
  }
  return out;
}

double CouplingMatrix::pair_sum() const { return 0.5 * values.sum(); }

bool CouplingMatrix::is_translation_invariant(double tol) const {
  const int n = size();
  if ((values - values.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  for (int i = 0; i < n; ++i) {
    auto [xi, yi] = geometry.coords(i);
    for (int j = 0; j < n; ++j) {
      auto [xj, yj] = geometry.coords(j);
      const int ref = geometry.site(xj - xi, yj - yi);
      if (std::abs(values(i, j) - values(0, ref)) > tol) return false;
    }
  }
  return true;
}

CouplingMatrix build_couplings(const LatticeGeometry& geometry, const CouplingSpec& spec) {
  spec.validate();
  const int n = geometry.size();
  CouplingMatrix cm{geometry, spec, Eigen::MatrixXd::Zero(n, n), 0.0};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double Jij = spec.at_distance(geometry.distance(i, j));
      cm.values(i, j) = Jij;
      cm.values(j, i) = Jij;
    }
  }
  cm.J0 = cm.values.row(0).sum();
  return cm;
}

MomentumGrid fourier_coupling(const CouplingMatrix& cm) {
  if (!cm.is_translation_invariant(1e-10)) {
    throw NumericalError("fourier_coupling: coupling matrix is not translation invariant");
  }
  const auto& g = cm.geometry;
  const int n = g.size();
  MomentumGrid grid{g, {}};
  grid.k.reserve(n);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int ny = 0; ny < g.Ly; ++ny) {
    for (int nx = 0; nx < g.Lx; ++nx) {
      const double kx = two_pi * nx / g.Lx;
      const double ky = two_pi * ny / g.Ly;
      // Row 0 suffices: J_k = sum_j e^{i k (r_0 - r_j)} J_0j. The imaginary
      // part cancels because J_0j = J_0,-j.
      double re = 0.0;
      double im = 0.0;
      for (int j = 1; j < n; ++j) {
        auto [dx, dy] = g.displacement(0, j);
        const double phase = -(kx * dx + ky * dy);
        re += cm.values(0, j) * std::cos(phase);
        im += cm.values(0, j) * std::sin(phase);
      }
      if (std::abs(im) > 1e-9 * std::max(1.0, std::abs(cm.J0))) {
        throw NumericalError("fourier_coupling: complex J_k, couplings not inversion symmetric");
      }
      grid.k.push_back({nx, ny, kx, ky, re});
    }
  }
  return grid;
}

void write_couplings_csv(const CouplingMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  const int n = cm.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << cm.values(i, j);
    }
    out << '\n';
  }
}

}  // namespace spinsqz
