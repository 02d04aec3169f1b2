#include "alelab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "alelab/errors.hpp"

namespace alelab {

double RadialGrid::max_gap() const {
  double g = 0.0;
  for (Eigen::Index i = 1; i < size(); ++i) g = std::max(g, nodes[i] - nodes[i - 1]);
  return g;
}

double RadialGrid::min_gap() const {
  double g = nodes[size() - 1];
  for (Eigen::Index i = 1; i < size(); ++i) g = std::min(g, nodes[i] - nodes[i - 1]);
  return g;
}

Vec RadialGrid::ghost_nodes() const {
  Vec g(ghost_count);
  for (int j = 0; j < ghost_count; ++j) g[j] = -nodes[j + 1];
  return g;
}

RadialGrid build_grid(double r_max, int n, double stretch, int ghost) {
  if (!(r_max > 0.0)) throw ConfigError("build_grid: r_max must be positive");
  if (n < 64) throw ConfigError("build_grid: n must be at least 64");
  if (!(stretch >= 1.0)) throw ConfigError("build_grid: stretch must be >= 1");
  if (ghost < 1) throw ConfigError("build_grid: need at least one ghost node");

  RadialGrid g;
  g.r_max = r_max;
  g.stretch = stretch;
  g.ghost_count = ghost;
  g.nodes.resize(n);
  const int gaps = n - 1;
  const double h0 = stretch == 1.0
                        ? r_max / gaps
                        : r_max * (stretch - 1.0) / (std::pow(stretch, gaps) - 1.0);
  g.nodes[0] = 0.0;
  double h = h0;
  for (int i = 1; i < n; ++i) {
    g.nodes[i] = g.nodes[i - 1] + h;
    h *= stretch;
  }
  g.nodes[n - 1] = r_max;

  g.quad_weights.resize(n);
  g.quad_weights[0] = 0.5 * (g.nodes[1] - g.nodes[0]);
  for (int i = 1; i < n - 1; ++i) g.quad_weights[i] = 0.5 * (g.nodes[i + 1] - g.nodes[i - 1]);
  g.quad_weights[n - 1] = 0.5 * (g.nodes[n - 1] - g.nodes[n - 2]);
  return g;
}

GridPtr make_grid(double r_max, int n, double stretch, int ghost) {
  return std::make_shared<const RadialGrid>(build_grid(r_max, n, stretch, ghost));
}

RadialGrid refine(const RadialGrid& grid) {
  return build_grid(grid.r_max, 2 * static_cast<int>(grid.size()) - 1, std::sqrt(grid.stretch),
                    grid.ghost_count);
}

namespace detail {

Stencil first_derivative_weights(double hm, double hp) {
  return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

Stencil second_derivative_weights(double hm, double hp) {
  return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

namespace {

// Fornberg weights for derivative `order` at x0 from points x.
Eigen::ArrayXd fornberg(double x0, const Eigen::ArrayXd& x, int order) {
  const int n = static_cast<int>(x.size());
  Eigen::ArrayXXd c = Eigen::ArrayXXd::Zero(n, order + 1);
  double c1 = 1.0, c4 = x[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(order);
}

}  // namespace
}  // namespace detail

Vec derivative(const Vec& field, int order, const RadialGrid& grid, Parity parity) {
  if (parity == Parity::Undeclared)
    throw ContractViolation("derivative: field parity at the bolt must be declared");
  if (order != 1 && order != 2) throw ContractViolation("derivative: order must be 1 or 2");
  const Eigen::Index n = grid.size();
  if (field.size() != n) throw ContractViolation("derivative: field size does not match grid");
  const Vec& u = grid.nodes;
  Vec out(n);

  const double sign = parity == Parity::Even ? 1.0 : -1.0;
  const double ghost = sign * field[1];
  const double h1 = u[1];
  out[0] = order == 1 ? (field[1] - ghost) / (2.0 * h1)
                      : (field[1] - 2.0 * field[0] + ghost) / (h1 * h1);

  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const double hm = u[i] - u[i - 1], hp = u[i + 1] - u[i];
    const auto w = order == 1 ? detail::first_derivative_weights(hm, hp)
                              : detail::second_derivative_weights(hm, hp);
    out[i] = w.m * field[i - 1] + w.c * field[i] + w.p * field[i + 1];
  }

  const int pts = order == 1 ? 3 : 4;
  Eigen::ArrayXd xs(pts);
  for (int j = 0; j < pts; ++j) xs[j] = u[n - pts + j];
  const Eigen::ArrayXd w = detail::fornberg(u[n - 1], xs, order);
  double acc = 0.0;
  for (int j = 0; j < pts; ++j) acc += w[j] * field[n - pts + j];
  out[n - 1] = acc;
  return out;
}

double integrate(const Vec& field, const Vec& weight, const RadialGrid& grid) {
  if (field.size() != grid.size() || weight.size() != grid.size())
    throw ContractViolation("integrate: size mismatch");
  return (grid.quad_weights * field * weight).sum();
}

double bolt_value(const Vec& field, const RadialGrid& grid, Parity parity) {
  if (parity == Parity::Undeclared)
    throw ContractViolation("bolt_value: parity must be declared");
  if (parity == Parity::Odd) return 0.0;
  const double a = grid.nodes[1] * grid.nodes[1], b = grid.nodes[2] * grid.nodes[2];
  return (b * field[1] - a * field[2]) / (b - a);
}

void close_at_bolt(Vec& field, const RadialGrid& grid, Parity parity) {
  field[0] = bolt_value(field, grid, parity);
}

double interpolate(const RadialGrid& grid, const Vec& field, double u) {
  const Vec& x = grid.nodes;
  const Eigen::Index n = grid.size();
  if (u <= x[0]) return field[0];
  if (u >= x[n - 1]) return field[n - 1];
  const auto it = std::upper_bound(x.data(), x.data() + n, u);
  const Eigen::Index i = (it - x.data()) - 1;

  auto slope = [&](Eigen::Index j) {
    if (j == 0) return (field[1] - field[0]) / (x[1] - x[0]);
    if (j == n - 1) return (field[n - 1] - field[n - 2]) / (x[n - 1] - x[n - 2]);
    const auto w = detail::first_derivative_weights(x[j] - x[j - 1], x[j + 1] - x[j]);
    return w.m * field[j - 1] + w.c * field[j] + w.p * field[j + 1];
  };
  const double h = x[i + 1] - x[i];
  const double s = (u - x[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * field[i] + h10 * h * slope(i) + h01 * field[i + 1] + h11 * h * slope(i + 1);
}

}  // namespace alelab
