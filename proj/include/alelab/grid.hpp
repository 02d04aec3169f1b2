#pragma once

#include <Eigen/Dense>
#include <memory>

namespace alelab {

using Vec = Eigen::ArrayXd;

enum class Parity { Undeclared, Even, Odd };

/// Radial nodes u_0 = 0 < u_1 < ... < u_{N-1} = r_max, geometric spacing.
struct RadialGrid {
  Vec nodes;
  Vec quad_weights;
  int ghost_count = 2;
  double stretch = 1.0;
  double r_max = 0.0;

  Eigen::Index size() const { return nodes.size(); }
  double max_gap() const;
  double min_gap() const;
  /// Mirror images -u_1 .. -u_g of the first interior nodes.
  Vec ghost_nodes() const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

RadialGrid build_grid(double r_max, int n, double stretch, int ghost = 2);
GridPtr make_grid(double r_max, int n, double stretch, int ghost = 2);

/// Halves every gap: n -> 2n-1, stretch -> sqrt(stretch). Old nodes are kept.
RadialGrid refine(const RadialGrid& grid);

/// Second-order finite difference. Ghost values come from `parity`;
/// the last node uses a one-sided stencil.
Vec derivative(const Vec& field, int order, const RadialGrid& grid, Parity parity);

/// Sum_i w_i f_i weight_i.
double integrate(const Vec& field, const Vec& weight, const RadialGrid& grid);

/// Value at u = 0 from nodes 1 and 2, assuming the given parity.
double bolt_value(const Vec& field, const RadialGrid& grid, Parity parity);

/// Overwrites node 0 by bolt_value (used after interior-only evaluation).
void close_at_bolt(Vec& field, const RadialGrid& grid, Parity parity);

/// Cubic Hermite interpolation (finite-difference slopes); clamps outside.
double interpolate(const RadialGrid& grid, const Vec& field, double u);

namespace detail {

/// Three-point weights for node i on a non-uniform grid.
struct Stencil {
  double m = 0, c = 0, p = 0;
};
Stencil first_derivative_weights(double hm, double hp);
Stencil second_derivative_weights(double hm, double hp);

}  // namespace detail

}  // namespace alelab
