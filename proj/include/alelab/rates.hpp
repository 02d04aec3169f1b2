#pragma once

#include <utility>
#include <vector>

namespace alelab {

/// Decay class t^{-gamma} (log t)^{has_log}. `exponent` is the power of t.
struct RateClass {
  double exponent = 0.0;
  bool has_log = false;
  double theta = 0.0;  // min{alpha, beta, alpha + beta - 1}
};

struct RateFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double log_coefficient = 0.0;
  double residual = 0.0;  // rms in log space
  double t_lo = 0.0, t_hi = 0.0;
  int samples = 0;
  bool has_log = false;
  bool degenerate = false;
};

RateClass convolution_rate_class(double alpha, double beta);

/// int_1^{t-1} s^{-alpha} (t-s)^{-beta} ds.
double convolution_integral(double alpha, double beta, double t);

/// Least squares  log v = a + gamma log t (+ c log log t).
/// Values below `floor` mark the fit degenerate.
RateFit fit_rate(const std::vector<std::pair<double, double>>& samples, bool allow_log,
                 double floor = 1e-300);

/// Same, without the minimum-sample / decade preconditions (used on short windows).
RateFit fit_power_law(const std::vector<std::pair<double, double>>& samples, bool allow_log,
                      double floor = 1e-300);

}  // namespace alelab
