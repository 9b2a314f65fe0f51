#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace spinsqz {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// First moments and symmetrized second moments 1/2<J_a J_b + J_b J_a> of the
/// collective spin at one time.
struct CollectiveMoments {
  double t = 0.0;
  Vec3 mean = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  int N = 0;

  Mat3 covariance() const { return second - mean * mean.transpose(); }
};

/// Expectation values accessible from ladder-operator algebra. Both the Dicke
/// ladder and the sector-resolved ED measure these and share the assembly.
struct LadderExpectations {
  std::complex<double> jp;        // <J+>
  std::complex<double> jp2;       // <J+ J+>
  std::complex<double> jp_jz;     // <J+ Jz + Jz J+>
  double jpjm_plus_jmjp = 0.0;    // <J+ J- + J- J+>
  double jz = 0.0;                // <Jz>
  double jz2 = 0.0;               // <Jz^2>
};

CollectiveMoments assemble_moments(const LadderExpectations& e, int N, double t);

/// Minimum of the variance over directions orthogonal to <J>.
struct TransverseVariance {
  double value;  // min eigenvalue of the transverse covariance
  double theta;  // angle of the minimizing direction from e1 toward e2, in (-pi/2, pi/2]
  double var_e1;
  double var_e2;
  double cov12;
  Vec3 e1;
  Vec3 e2;
};

/// Orthonormal pair spanning the plane orthogonal to `axis`. For axis = x the
/// pair is (y, z).
std::pair<Vec3, Vec3> transverse_frame(const Vec3& axis);

/// Throws NumericalError("polarization lost: squeezing frame undefined") when
/// |<J>| < eps_rel * N.
TransverseVariance min_transverse_variance(const CollectiveMoments& m, double eps_rel = 1e-9);

struct SqueezingPoint {
  double t = 0.0;
  double m_x = 0.0;         // <J^x>/N
  double var_jx = 0.0;      // Var(J^x)/N
  double var_e1 = 0.0;      // per spin
  double var_e2 = 0.0;
  double cov12 = 0.0;
  double v_perp_min = 0.0;  // min transverse variance per spin
  double theta_min = 0.0;
  double xi2 = 0.0;
  std::optional<double> n_sw;
};

/// xi_R^2 = N min Var(J_perp) / |<J>|^2.
SqueezingPoint squeezing_parameter(const CollectiveMoments& m);

/// Largest k+1 such that xi2 < 1/k certifies (k+1)-partite entanglement; 1 when
/// nothing is certified.
int entanglement_depth(double xi2);

struct TimeSeries {
  std::vector<SqueezingPoint> points;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::string> warnings;
  // Jackknife standard errors, filled by ensemble solvers only.
  std::vector<double> m_x_err;
  std::vector<double> xi2_err;

  std::vector<double> times() const;
  std::vector<double> column(double SqueezingPoint::*field) const;
};

/// Squeezing point from moments; when the frame is undefined the transverse
/// fields are NaN and a warning is appended.
SqueezingPoint squeezing_point_or_nan(const CollectiveMoments& m, std::vector<std::string>& warnings);

struct Optimum {
  double t_min;    // argmin of v_perp
  double v_min;
  double t_opt;    // argmin of xi2
  double xi2_opt;
  double m_x_at_min;
};

/// Grid argmins refined by a three-point parabola. Throws NumericalError
/// ("extend time window") when a minimum sits on the grid boundary.
Optimum find_optimum(const TimeSeries& ts);

/// Vertex of the parabola through three points (x0<x1<x2, y1 the smallest).
std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                                          double y2);

}  // namespace spinsqz
