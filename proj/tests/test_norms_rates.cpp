#include <cmath>
#include <vector>

#include "alelab/errors.hpp"
#include "alelab/norms.hpp"
#include "alelab/rates.hpp"
#include "doctest.h"

using namespace alelab;

namespace {

// int_0^R e^{-a u^2} u^3 du
double gauss_moment(double a, double R) {
  return (1.0 - std::exp(-a * R * R) * (1.0 + a * R * R)) / (2.0 * a * a);
}

}  // namespace

TEST_CASE("flat L^p norms of a gaussian match the radial moments") {
  // The flat volume density is proportional to u^3, so ratios to |1|_{L^1} are exact.
  const double R = 6.0;
  const CohomMetric f = flat_metric(make_grid(R, 800, 1.002));
  const Vec g = (-f.nodes().square()).exp();
  const double vol = lp_of_pointwise(Vec::Ones(f.size()), 1.0, f);
  const double ball = std::pow(f.nodes()[f.size() - 1], 4) / 4.0;
  CHECK(std::pow(lp_of_pointwise(g, 2.0, f), 2) / vol == doctest::Approx(gauss_moment(2.0, R) / ball).epsilon(1e-4));
  CHECK(std::pow(lp_of_pointwise(g, 4.0, f), 4) / vol == doctest::Approx(gauss_moment(4.0, R) / ball).epsilon(1e-4));
  CHECK(lp_of_pointwise(g, kInfinity, f) == 1.0);
}

TEST_CASE("norms are absolutely homogeneous") {
  const CohomMetric h = eguchi_hanson(1.0, make_grid(20.0, 300, 1.01));
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  for (int a = 0; a < 4; ++a) k.frame.col(a) = (a + 1.0) * (-(h.nodes() - 2.0).square()).exp();
  for (double p : {1.5, 2.0, 4.0, kInfinity}) {
    NormSpec s;
    s.p = p;
    CHECK(norm(-3.0 * k, s, h) == doctest::Approx(3.0 * norm(k, s, h)).epsilon(1e-13));
  }
}

TEST_CASE("heat-kernel rate formula") {
  CHECK(predicted_exponent(4, 2.0, 4.0, 0).exponent == doctest::Approx(-0.5));
  CHECK_FALSE(predicted_exponent(4, 2.0, 4.0, 0).capped);
  CHECK(predicted_exponent(4, 2.0, kInfinity, 0).exponent == doctest::Approx(-1.0));
  // 2(1/2 - 0) + 1/2 exceeds n/(2p) = 1: capped at -1 plus slack.
  const PredictedExponent c = predicted_exponent(4, 2.0, kInfinity, 1, 0.05);
  CHECK(c.capped);
  CHECK(c.exponent == doctest::Approx(-0.95));
  CHECK_THROWS_AS(predicted_exponent(4, 1.0, 2.0, 0), DomainError);
  CHECK_THROWS_AS(predicted_exponent(4, 4.0, 2.0, 0), DomainError);
}

TEST_CASE("convolution integral against closed forms") {
  for (double t : {3.0, 10.0, 1e3, 1e5}) {
    CHECK(convolution_integral(1.0, 1.0, t) == doctest::Approx(2.0 / t * std::log(t - 1.0)).epsilon(1e-9));
    const double arcs = 2.0 * (std::asin(std::sqrt((t - 1.0) / t)) - std::asin(std::sqrt(1.0 / t)));
    CHECK(convolution_integral(0.5, 0.5, t) == doctest::Approx(arcs).epsilon(1e-9));
  }
}

TEST_CASE("rate classes") {
  CHECK(convolution_rate_class(2.0, 3.0).exponent == -2.0);
  CHECK_FALSE(convolution_rate_class(2.0, 3.0).has_log);
  CHECK(convolution_rate_class(0.5, 1.0).exponent == -0.5);
  CHECK(convolution_rate_class(0.5, 1.0).has_log);
  CHECK(convolution_rate_class(0.5, 0.3).exponent == doctest::Approx(0.2));
  CHECK_THROWS_AS(convolution_rate_class(0.0, 1.0), DomainError);
}

TEST_CASE("power-law fits recover exact samples") {
  std::vector<std::pair<double, double>> s, l;
  for (double t = 1e2; t <= 1e5; t *= 1.5) {
    s.emplace_back(t, 3.0 * std::pow(t, -1.5));
    l.emplace_back(t, 2.0 / t * std::log(t - 1.0));
  }
  const RateFit f = fit_power_law(s, false);
  CHECK(f.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.residual < 1e-12);
  const RateFit g = fit_power_law(l, true);
  CHECK(g.exponent == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(g.log_coefficient == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(g.has_log);
  s.back().second = 0.0;
  CHECK(fit_power_law(s, false).degenerate);
}
