#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "alelab/geometry.hpp"
#include "alelab/operators.hpp"

namespace alelab {

struct Trajectory;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class NormKind { Lp, Wkp, WeightedWkp, X, Z, Y };

struct NormSpec {
  NormKind kind = NormKind::Lp;
  int k = 0;
  double p = 2.0;
  double q = 2.0;
  double r = 8.0;
  double delta = 0.0;
  int dim = 4;

  std::string describe() const;
};

/// Throws ConfigError when the exponents violate the standing assumptions.
void validate(const NormSpec& spec);

/// L^p of a pointwise nonnegative density over (grid, volume of `metric`); p = inf -> sup.
double lp_of_pointwise(const Vec& pointwise, double p, const CohomMetric& metric);

double norm(const InvariantTensor& k, const NormSpec& spec, const CohomMetric& metric);
/// Scalar field (function) version; derivatives are d/du in the frame.
double norm(const Vec& f, const NormSpec& spec, const CohomMetric& metric);

/// |nabla^j k| for j = 0..order (frame of `metric`).
std::vector<Vec> derivative_norms(const InvariantTensor& k, const CohomMetric& metric, int order);

struct NormReport {
  std::string spec;
  double value = 0.0;
  double argmax_time = 0.0;
};

struct TrajectoryNorms {
  NormReport x, z, y;
  std::vector<NormReport> terms;  // each sup term separately
};

/// X_{q,r}, Z_{q,r} and Y_{q,r} over the stored snapshots (t >= 1), covariant
/// derivatives taken with respect to the trajectory's background.
TrajectoryNorms trajectory_norms(const Trajectory& traj, double q, double r);

struct PredictedExponent {
  double exponent = 0.0;
  bool capped = false;
};

/// Heat-kernel L^p -> L^q rate for the i-th derivative in dimension n.
PredictedExponent predicted_exponent(int n, double p, double q, int i, double slack = 0.0);

}  // namespace alelab
