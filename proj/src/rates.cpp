#include "alelab/rates.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "alelab/errors.hpp"

namespace alelab {

RateClass convolution_rate_class(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw DomainError("convolution_rate_class: exponents must be positive");
  const double gamma = std::min(alpha, beta), delta = std::max(alpha, beta);
  RateClass rc;
  rc.theta = std::min({alpha, beta, alpha + beta - 1.0});
  if (delta > 1.0) {
    rc.exponent = -gamma;
  } else if (delta == 1.0) {
    rc.exponent = -gamma;
    rc.has_log = true;
  } else {
    rc.exponent = 1.0 - alpha - beta;
  }
  return rc;
}

namespace {

// int_1^{t/2} s^{-a} (t-s)^{-b} ds with s = e^x.
double half_integral(double a, double b, double t) {
  using boost::math::quadrature::gauss_kronrod;
  const double xmax = std::log(0.5 * t);
  if (xmax <= 0.0) return 0.0;
  auto f = [a, b, t](double x) {
    const double s = std::exp(x);
    return std::exp((1.0 - a) * x) * std::pow(t - s, -b);
  };
  double err = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, 0.0, xmax, 25, 1e-13, &err);
}

}  // namespace

double convolution_integral(double alpha, double beta, double t) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("convolution_integral: exponents must be positive");
  if (!(t >= 2.0)) throw DomainError("convolution_integral: need t >= 2");
  if (t == 2.0) return 0.0;
  // Second half [t/2, t-1] becomes the first half with alpha and beta swapped.
  return half_integral(alpha, beta, t) + half_integral(beta, alpha, t);
}

RateFit fit_power_law(const std::vector<std::pair<double, double>>& samples, bool allow_log,
                      double floor) {
  RateFit fit;
  fit.samples = static_cast<int>(samples.size());
  fit.has_log = false;
  if (samples.empty()) {
    fit.degenerate = true;
    return fit;
  }
  fit.t_lo = samples.front().first;
  fit.t_hi = samples.back().first;
  for (const auto& [t, v] : samples) {
    fit.t_lo = std::min(fit.t_lo, t);
    fit.t_hi = std::max(fit.t_hi, t);
    if (!(std::abs(v) > floor) || !std::isfinite(v)) fit.degenerate = true;
  }
  const int cols = allow_log ? 3 : 2;
  if (fit.degenerate || fit.samples < cols) {
    fit.degenerate = true;
    return fit;
  }
  Eigen::MatrixXd M(fit.samples, cols);
  Eigen::VectorXd y(fit.samples);
  for (int i = 0; i < fit.samples; ++i) {
    const double lt = std::log(samples[i].first);
    M(i, 0) = 1.0;
    M(i, 1) = lt;
    if (allow_log) M(i, 2) = std::log(lt);
    y[i] = std::log(std::abs(samples[i].second));
  }
  const Eigen::VectorXd c = M.colPivHouseholderQr().solve(y);
  fit.amplitude = std::exp(c[0]);
  fit.exponent = c[1];
  if (allow_log) {
    fit.log_coefficient = c[2];
    fit.has_log = std::abs(c[2]) > 0.25;
  }
  fit.residual = std::sqrt((M * c - y).squaredNorm() / fit.samples);
  return fit;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& samples, bool allow_log, double floor) {
  if (samples.size() < 8) throw ConfigError("fit_rate: need at least 8 samples");
  double lo = samples.front().first, hi = lo;
  for (const auto& s : samples) {
    if (!(s.first > 0.0)) throw DomainError("fit_rate: sample times must be positive");
    lo = std::min(lo, s.first);
    hi = std::max(hi, s.first);
  }
  if (hi < 10.0 * lo * (1.0 - 1e-12)) throw ConfigError("fit_rate: samples must span a decade");
  if (allow_log && lo <= 1.0) throw DomainError("fit_rate: log term needs t > 1");
  return fit_power_law(samples, allow_log, floor);
}

}  // namespace alelab
