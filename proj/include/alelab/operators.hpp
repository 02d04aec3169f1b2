#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "alelab/geometry.hpp"

namespace alelab {

/// Radial vector field V^u d/du (coordinate component, odd at the bolt).
struct RadialVector {
  Vec comp;
};

/// Linear operator on frame components
///   (L k)_b = -(c2 k_b'' + c1 k_b') - sum_d R_bd k_d.
/// Interior nodes use `stencil` (weights of k_{p-1}, k_p, k_{p+1} for c2 k'' + c1 k'),
/// built in flux form (1/mu)(mu c2 k')' against the volume density mu plus a centred
/// remainder, so the pure Lichnerowicz operator is symmetric in the discrete L^2(h).
struct RadialOperator {
  Vec c2, c1;
  Eigen::ArrayX3d stencil;
  std::vector<Eigen::Matrix4d> reaction;
  std::string frame;
  GridPtr grid;
};

/// Coefficient inputs for assemble_operator. G holds g^{aa} in the frame of h;
/// ghat (optional) turns the curvature term into the mixed g/h contraction.
struct OperatorWeights {
  Eigen::ArrayX4d G;
  const Eigen::ArrayX4d* ghat = nullptr;
  Vec extra_c1;  // added to c1 if non-empty
};

RadialOperator assemble_operator(const CohomMetric& h, const FrameGeometry& fg, const OperatorWeights& w);

/// Delta_L = nabla^* nabla - 2 Rm on h (nonnegative sign convention).
RadialOperator lichnerowicz_operator(const CohomMetric& h);
/// Delta_{L,g,h} k = -g^{ab} nabla^2_ab k - (mixed curvature terms); frame of h.
RadialOperator mixed_lichnerowicz_operator(const CohomMetric& g, const CohomMetric& h);

InvariantTensor apply(const RadialOperator& op, const InvariantTensor& k);

InvariantTensor lichnerowicz(const CohomMetric& h, const InvariantTensor& k);
InvariantTensor mixed_lichnerowicz(const CohomMetric& g, const CohomMetric& h, const InvariantTensor& k);
/// nabla^* nabla k.
InvariantTensor rough_laplacian(const CohomMetric& h, const InvariantTensor& k);

/// Block-tridiagonal solve of (alpha I + dt L) x = rhs. Node 0 is closed by even
/// parity, the last node is Dirichlet.
class ImplicitSolver {
 public:
  ImplicitSolver(const RadialOperator& op, double dt, double alpha = 1.0);
  InvariantTensor solve(const InvariantTensor& rhs,
                        const Eigen::Array4d& boundary = Eigen::Array4d::Zero()) const;

 private:
  Eigen::Index n_;
  std::string frame_;
  GridPtr grid_;
  double bolt_a_, bolt_b_;
  std::vector<Eigen::Matrix4d> lower_, upper_, diag_inv_;
};

RadialVector deturck_field(const CohomMetric& g, const CohomMetric& h);
/// Closed-form linearisation of V(h + s k, h) at s = 0.
RadialVector deturck_linear(const CohomMetric& h, const InvariantTensor& k);
/// Central finite-difference directional derivatives, s = eps^{1/3} / |k|_inf.
RadialVector deturck_linearized(const CohomMetric& h, const InvariantTensor& k);
InvariantTensor linearized_ricci(const CohomMetric& h, const InvariantTensor& k);

InvariantTensor lie_derivative(const RadialVector& X, const CohomMetric& g);

/// Pointwise frame length sqrt(A) |V^u|.
Vec vector_length(const RadialVector& V, const CohomMetric& g);

/// Rank-m frame tensor: column index sum_j a_j 4^{m-1-j}.
struct TensorField {
  int rank = 0;
  Eigen::ArrayXXd comps;
};

TensorField as_tensor_field(const InvariantTensor& k);
/// nabla T with the derivative index first.
TensorField covariant_derivative(const CohomMetric& h, const FrameGeometry& fg, const TensorField& T);
Vec pointwise_norm(const TensorField& T);

enum class Scheme { ImplicitEuler, BDF2 };

struct DtPolicy {
  double dt0 = 0.01;
  double growth = 1.0;
  double dt_max = 1.0;
  Scheme scheme = Scheme::BDF2;
};

/// e^{-t Delta_{L,h}} k0, homogeneous Dirichlet at r_max.
InvariantTensor heat_semigroup(const CohomMetric& h, const InvariantTensor& k0, double t, const DtPolicy& policy);

using MetricPath = std::function<CohomMetric(double)>;

enum class Generator { LichnerowiczInfinity, Mixed };

struct ScheduleLeg {
  Generator generator;
  double from, to;
};

/// Legs of P_{s->t}: Delta_{L,inf} on [s, max{t-1,s}], Delta_{L,g,h} on [max{t-1,s}, t].
struct EvolutionSchedule {
  double s = 1.0, t = 1.0, dt = 0.01;
  double switch_time() const;
  std::vector<ScheduleLeg> legs() const;
};

EvolutionSchedule make_schedule(double s, double t, double dt);

/// P(g,h,h_inf)_{s->t}(k_s). Implicit Euler, coefficients frozen at the start of each step.
/// Input and output are in the frame of h_inf.
InvariantTensor mixed_evolution(const EvolutionSchedule& schedule, const MetricPath& g_path,
                                const MetricPath& h_path, const CohomMetric& h_inf,
                                const InvariantTensor& k_s);

/// Q = P_{s->t} k_s + sum_m dt P_{r_m -> t} F_m over r_m = s + m dt, m < M.
/// Sources are in the frame of h_inf.
InvariantTensor duhamel(const EvolutionSchedule& schedule, const MetricPath& g_path,
                        const MetricPath& h_path, const CohomMetric& h_inf, const InvariantTensor& k_s,
                        const std::vector<InvariantTensor>& source);

/// Same value as duhamel, computed by a single accumulating sweep.
InvariantTensor duhamel_stepping(const EvolutionSchedule& schedule, const MetricPath& g_path,
                                 const MetricPath& h_path, const CohomMetric& h_inf,
                                 const InvariantTensor& k_s, const std::vector<InvariantTensor>& source);

}  // namespace alelab
