#pragma once

#include <string>
#include <vector>

#include "alelab/gauge.hpp"
#include "alelab/geometry.hpp"
#include "alelab/operators.hpp"
#include "alelab/rates.hpp"
#include "alelab/trajectory.hpp"

namespace alelab {

/// Pieces of the Ricci-de Turck flow written for k = g - h, all in the frame of h.
struct RdtTerms {
  InvariantTensor k;
  TensorField grad_k;     // T_cab = nabla_c k_ab
  Eigen::ArrayX4d G;      // g^{aa}
  Eigen::ArrayX4d ghat;   // g_aa
  Vec W0;                 // g^{ap} g^{0q} nabla_a k_pq
  InvariantTensor F1, F4, F5, Rm;
};

RdtTerms rdt_terms(const CohomMetric& g, const CohomMetric& h);

enum class FlowForm { RdT1, RdT3 };

/// d_t k, frame of h. RdT1: -Delta_{L,g,h} k + F1. RdT3: sum G_a nabla^2_aa k - W0 E0 k + F4 + F5.
InvariantTensor rdt_rhs(const CohomMetric& g, const CohomMetric& h, FlowForm form);
/// -2 Ric_g + L_{V(g,h)} g, frame of h.
InvariantTensor rdt_rhs_direct(const CohomMetric& g, const CohomMetric& h);

/// Operator of the implicit half of the IMEX step: k -> -(sum G_a nabla^2_aa k - W0 E0 k + 2 Rm k).
RadialOperator rdt_implicit_operator(const CohomMetric& h, const RdtTerms& terms);

/// One IMEX step of the h-gauged flow; the outer boundary value of k is held.
/// Throws FlowBlowupError if g leaves [0.5, 2] h.
CohomMetric rdt_step(const CohomMetric& g, const CohomMetric& h, double dt);

struct FlowOptions {
  DtPolicy dt;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  double switch_time = 1.0;   // moving gauge starts here
  double warm_bracket = 0.05; // relative bracket around the previous eps
  bool record_residual = true;
};

/// Fixed reference h_hat on [0, t_end].
Trajectory run_fixed_gauge(const CohomMetric& g0, const CohomMetric& h_hat, const FlowOptions& options);
/// h_hat-gauge on [0, switch_time], then reference Phi(g_t), recomputed every step.
/// h_hat is the chart metric of g0.
Trajectory run_moving_gauge(const CohomMetric& g0, const FlowOptions& options);

DiagnosticsRow diagnostics_row(double t, const CohomMetric& g, const CohomMetric& h, double eps);

struct FitRequest {
  std::string column;
  double t_lo = 1.0, t_hi = 1.0;
  bool allow_log = false;
};

struct NamedFit {
  std::string column;
  RateFit fit;
};

double column_value(const DiagnosticsRow& row, const std::string& column);
std::vector<NamedFit> flow_diagnostics(const Trajectory& traj, const std::vector<FitRequest>& requests);

/// Moving-gauge Picard iteration on [1, t_end].
struct PicardOptions {
  double t_end = 10.0;
  double dt = 0.02;
  int max_iters = 8;
  double tol = 1e-8;
  double q = 2.0, r = 8.0;
  double output_ratio = 1.1;  // geometric output mesh for the Y norm
};

struct PicardState {
  int iterations = 0;
  std::vector<double> distances;  // Y-distance between successive iterates
  std::vector<double> times;      // fine mesh
  std::vector<CohomMetric> h;     // h^{(i)} on the fine mesh
  std::vector<InvariantTensor> k; // k^{(i)}, frame of h^{(i)}
};

PicardState picard_solve(const CohomMetric& h1, const InvariantTensor& k1, const PicardOptions& options);
/// Trajectory view of a Picard state (snapshots on the output mesh).
Trajectory picard_trajectory(const PicardState& state, const CohomMetric& background, double ratio);

}  // namespace alelab
