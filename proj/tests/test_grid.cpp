#include <cmath>

#include "alelab/errors.hpp"
#include "alelab/grid.hpp"
#include "alelab/rates.hpp"
#include "doctest.h"

using namespace alelab;

TEST_CASE("grid nodes are ordered and end at r_max") {
  const auto g = build_grid(50.0, 200, 1.01);
  CHECK(g.nodes[0] == 0.0);
  CHECK(g.nodes[g.size() - 1] == doctest::Approx(50.0));
  for (Eigen::Index i = 1; i < g.size(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
}

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(build_grid(-1.0, 100, 1.0), ConfigError);
  CHECK_THROWS_AS(build_grid(1.0, 10, 1.0), ConfigError);
  CHECK_THROWS_AS(build_grid(1.0, 100, 0.9), ConfigError);
}

TEST_CASE("refinement nests the nodes") {
  const auto g = build_grid(20.0, 101, 1.02);
  const auto f = refine(g);
  REQUIRE(f.size() == 201);
  for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(f.nodes[2 * i] == doctest::Approx(g.nodes[i]).epsilon(1e-12));
}

TEST_CASE("trapezoid quadrature of a gaussian") {
  const auto g = build_grid(12.0, 2000, 1.0);
  const Vec f = (-g.nodes.square()).exp();
  CHECK(integrate(f, Vec::Ones(g.size()), g) == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-6));
}

TEST_CASE("ball volume with the flat density") {
  const double R = 3.0;
  const auto g = build_grid(R, 4001, 1.0);
  const Vec dens = 2 * M_PI * M_PI * g.nodes.cube();
  CHECK(integrate(dens, Vec::Ones(g.size()), g) == doctest::Approx(M_PI * M_PI * std::pow(R, 4) / 2).epsilon(1e-6));
}

TEST_CASE("undeclared parity is refused") {
  const auto g = build_grid(1.0, 100, 1.0);
  CHECK_THROWS_AS(derivative(Vec::Zero(100), 1, g, Parity::Undeclared), ContractViolation);
}

namespace {
double derivative_error(int n, int order) {
  const auto g = build_grid(4.0, n, 1.003);
  const Vec u = g.nodes;
  const Vec f = (u.square()).cos();
  const Vec exact = order == 1 ? Vec(-2 * u * u.square().sin())
                               : Vec(-2 * u.square().sin() - 4 * u.square() * u.square().cos());
  const Vec d = derivative(f, order, g, Parity::Even);
  return (d - exact).abs().maxCoeff();
}
}  // namespace

TEST_CASE("derivatives converge at second order") {
  for (int order : {1, 2}) {
    const double e1 = derivative_error(201, order);
    const double e2 = derivative_error(401, order);
    CHECK(e1 / e2 >= 1.9);
  }
}

TEST_CASE("odd parity vanishes at the bolt") {
  const auto g = build_grid(2.0, 100, 1.0);
  CHECK(bolt_value(g.nodes, g, Parity::Odd) == 0.0);
  const Vec f = 1.0 + g.nodes.square();
  CHECK(bolt_value(f, g, Parity::Even) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interpolation reproduces smooth data") {
  const auto g = build_grid(3.0, 301, 1.0);
  const Vec f = g.nodes.sin();
  CHECK(interpolate(g, f, 1.2345) == doctest::Approx(std::sin(1.2345)).epsilon(1e-5));
}

TEST_CASE("convolution rate classes") {
  auto c = convolution_rate_class(2.0, 2.0);
  CHECK(c.exponent == doctest::Approx(-2.0));
  CHECK_FALSE(c.has_log);
  c = convolution_rate_class(1.0, 1.0);
  CHECK(c.exponent == doctest::Approx(-1.0));
  CHECK(c.has_log);
  c = convolution_rate_class(0.3, 0.4);
  CHECK(c.exponent == doctest::Approx(0.3));
}

TEST_CASE("convolution integral special value") {
  CHECK(convolution_integral(1.0, 1.0, 3.0) == doctest::Approx(2.0 * std::log(2.0) / 3.0).epsilon(1e-12));
  CHECK(convolution_integral(1.5, 0.5, 7.0) == doctest::Approx(convolution_integral(0.5, 1.5, 7.0)).epsilon(1e-13));
}

TEST_CASE("power-law fit recovers a clean exponent") {
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 40; ++i) {
    const double t = 2.0 * std::pow(1.2, i);
    samples.emplace_back(t, 3.0 * std::pow(t, -1.5));
  }
  const auto fit = fit_rate(samples, false);
  CHECK(fit.exponent == doctest::Approx(-1.5).epsilon(1e-10));
  CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-8));
}
