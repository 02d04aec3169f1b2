#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "alelab/grid.hpp"
#include "alelab/rates.hpp"

namespace alelab {


/// Diagonal Bianchi IX metric  A du^2 + B1 a1^2 + B2 a2^2 + B3 a3^2  on a radial grid.
/// a1 is the Hopf fibre direction; a_i are left-invariant with  sum a_i^2  the unit S^3.
struct CohomMetric {
  GridPtr grid;
  Eigen::ArrayX4d comps;  // columns A, B1, B2, B3
  Vec r;                  // asymptotic radius of each node
  double eps = 0.0;       // family parameter (0 for the flat cone)
  double chart_eps = 0.0; // epsilon of the metric whose geodesic distance is u
  int group_order = 2;
  std::string label;

  Eigen::Index size() const { return comps.rows(); }
  const Vec& nodes() const { return grid->nodes; }
  /// True if the sphere direction i (1..3) collapses at u = 0.
  bool collapses(int i) const { return comps(0, i) == 0.0; }
};

/// Diagonal symmetric 2-tensor as frame components relative to `reference`.
struct InvariantTensor {
  Eigen::ArrayX4d frame;
  std::string reference;

  Eigen::Index size() const { return frame.rows(); }
  static InvariantTensor zero(Eigen::Index n, std::string ref);
};

InvariantTensor operator+(const InvariantTensor& a, const InvariantTensor& b);
InvariantTensor operator-(const InvariantTensor& a, const InvariantTensor& b);
InvariantTensor operator*(double s, const InvariantTensor& a);

void require_frame(const InvariantTensor& k, const CohomMetric& m, const char* where);

/// Unique label for derived metrics.
std::string fresh_label(const std::string& base);

/// EH_eps in the geodesic chart of EH_{chart_eps}. With eps == chart_eps this is
/// the usual metric, A = 1.
CohomMetric eh_family(double eps, double chart_eps, GridPtr grid);
CohomMetric eguchi_hanson(double eps, GridPtr grid);
CohomMetric flat_metric(GridPtr grid);

/// Coefficients of dr^2, a1^2, a2^2, a3^2 in the r chart.
std::array<double, 4> eh_coefficients_at_r(double eps, double r);

/// d/d eps of eh_family at fixed chart, as frame components relative to h.
InvariantTensor eh_family_tangent(const CohomMetric& h);

/// Per-node orthonormal-frame data shared by curvature and operator code.
struct FrameGeometry {
  Vec A;                   // du^2 coefficient
  Vec dlnA;                // (ln A)'
  Eigen::ArrayX3d ell;     // (ln B_i)'
  Eigen::ArrayX3d s;       // second fundamental form of the orbits, ell/(2 sqrt A)
  Eigen::ArrayX3d D;       // orbit connection: Gamma_ijk = -eps_ijk D_i
  std::vector<Eigen::Matrix4d> K;  // sectional curvatures K(a,b) of frame planes
};

FrameGeometry frame_geometry(const CohomMetric& g);

/// Ricci tensor in the frame of `g`.
InvariantTensor ricci_tensor(const CohomMetric& g);
InvariantTensor ricci_tensor(const CohomMetric& g, const FrameGeometry& fg);
Vec scalar_curvature(const CohomMetric& g);
/// Rm(k)_ij = R_imnj k^mn.
InvariantTensor riemann_action(const CohomMetric& g, const InvariantTensor& k);

/// (2 pi^2/|Gamma|) sqrt(A B1 B2 B3); integrate against it for L^2(g).
Vec volume_density(const CohomMetric& g);
double l2_inner(const InvariantTensor& a, const InvariantTensor& b, const CohomMetric& g);

/// (g - h) in the frame of h.
InvariantTensor difference(const CohomMetric& g, const CohomMetric& h);
/// h + k with k in the frame of h.
CohomMetric perturb(const CohomMetric& h, const InvariantTensor& k);
/// Same tensor, frame components relative to `to`.
InvariantTensor reframe(const InvariantTensor& k, const CohomMetric& from, const CohomMetric& to);

/// sqrt(r^4 + eps^4): an even function of u at the bolt (r^2 itself is odd there).
/// Reduces to r^2 on the flat cone.
Vec smooth_radius_sq(const CohomMetric& g);

/// Polar-frame deviation from the flat cone in asymptotic coordinates:
/// columns dr^2, a1, a2, a3 relative components.
Eigen::ArrayX4d asymptotic_deviation(const CohomMetric& g);
RateFit ale_order_fit(const CohomMetric& g, double r_lo, double r_hi);
double adm_mass(const CohomMetric& g, double radius);

void write_geometry_csv(const CohomMetric& g, const std::string& path);

}  // namespace alelab
