#pragma once

#include <string>
#include <vector>

#include "alelab/flow.hpp"
#include "alelab/geometry.hpp"

namespace alelab {

/// Finite-volume Laplace-Beltrami (1/mu)(mu f'/A)' on a cohomogeneity-one metric.
/// Node 0 uses the half cell [0, u_{1/2}]; the last node is left at zero.
Vec laplace_beltrami(const CohomMetric& h, const Vec& f);
/// Solves laplace_beltrami(h, u) = -rhs with u(r_max) = 0.
Vec solve_poisson(const CohomMetric& h, const Vec& rhs);
/// Scalar curvature of (1 + u) h for Ricci-flat h, from the conformal transformation law
/// with the finite-volume Laplacian: -3 Lap(phi)/phi^2 + (3/2)|d phi|^2/phi^3.
Vec conformal_scal(const CohomMetric& h, const Vec& u);
CohomMetric conformal_metric(const CohomMetric& h, const Vec& u);

struct SourceProfile {
  double amplitude = 0.05;
  double center = 3.0;
  double width = 1.0;
  double tail_exponent = 0.0;  // 0 -> 2 + n/p + 0.1
};

/// Positive source: amplitude * (bump + (1 + rho^2)^{-tail/2}), rho^2 = smooth_radius_sq.
Vec source_profile(const CohomMetric& h, const SourceProfile& s, double p);

struct ConformalFamily {
  CohomMetric base;
  double p = 3.0;
  std::vector<Vec> sources;  // f_i
  std::vector<Vec> factors;  // u_i
  std::vector<double> shrink;  // amplitude factor kept by the positivity bisection
  std::vector<CohomMetric> metrics;
  std::vector<double> min_scal, norm_lp, norm_inf;
};

/// g_i = (1 + u_i) h_hat with 3 Lap(u_i) = -f_i, f_i = 2^{-(i-1)} f. Requires p > 2.
ConformalFamily conformal_psc_sequence(const CohomMetric& h_hat, double p, int count, const SourceProfile& profile = {});

/// d_t scal - (Lap scal + 2|Ric|^2 + V(scal)) for a de Turck step g -> gn against h.
Vec super_heat_defect(const CohomMetric& g, const CohomMetric& gn, const CohomMetric& h, double dt);

struct PositivityOptions {
  double t_end = 1.0;
  double dt = 0.01;
  double tolerance = 1e-6;  // allowed negativity of scal_{g0}
  int skip_outer = 4;       // outer nodes excluded from the defect
};

struct PositivityReport {
  bool precondition = true;  // scal_{g0} >= -tolerance
  double initial_min_scal = 0.0;
  double min_scal = 0.0;     // over all steps and nodes, relative to scal_h
  double max_defect = 0.0;   // sup over steps of the L^2 super-heat defect
  double max_budget = 0.0;   // sup over steps of the step budget
  double worst_ratio = 0.0;  // sup of defect / budget
  std::vector<double> times, defects, budgets, mins;
};

/// Fixed-gauge flow from g0 against h with the super-heat defect tracked each step (L^2(h)).
/// Scal is measured as scal_g - scal_h, h discretised on the same grid.
/// Step budget: the defect along a vanishing step (spatial floor) plus dt |d_t^2 scal|.
PositivityReport scal_positivity_run(const CohomMetric& g0, const CohomMetric& h, const PositivityOptions& options);

struct RigidityOptions {
  double t_end = 20.0;
  double dt0 = 0.02, growth = 1.05, dt_max = 0.5;
  double fit_lo = 2.0, fit_hi = 20.0;
  double track_u = 0.0;  // tracked node (nearest u)
};

struct RigidityReport {
  double p = 0.0;
  double predicted_upper = 0.0;  // -n/(2p) - 1
  double heat_floor = -2.0;      // -n/2
  double fitted = 0.0;
  bool fit_degenerate = false;
  bool positivity = true;        // scal stayed >= -1e-6 along the run
  std::string follows;           // "upper", "heat_floor" or "none"
  std::vector<std::pair<double, double>> samples;  // (t, scal(x0, t))
};

/// Runs the flow and compares the decay of scal - scal_{h_hat} at a tracked point with both bounds.
/// Rejects p <= 1, p = n/(n-2), and initial data with scal < -1e-6.
RigidityReport rigidity_experiment(const CohomMetric& h_hat, const CohomMetric& g0, double p,
                                   const RigidityOptions& options = {});

}  // namespace alelab
