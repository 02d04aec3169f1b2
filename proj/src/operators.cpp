#include "alelab/operators.hpp"

#include <cfloat>
#include <cmath>

#include "alelab/errors.hpp"

namespace alelab {

namespace {

// The two sphere directions other than i (0-based sphere index -> frame index 1..3).
void complement(int i, int& j, int& m) {
  j = (i + 1) % 3 + 1;
  m = (i + 2) % 3 + 1;
}

void close_tensor(Eigen::ArrayX4d& f, const RadialGrid& grid) {
  for (int c = 0; c < 4; ++c) {
    Vec col = f.col(c);
    close_at_bolt(col, grid, Parity::Even);
    f(0, c) = col[0];
  }
}

}  // namespace

RadialOperator assemble_operator(const CohomMetric& h, const FrameGeometry& fg, const OperatorWeights& w) {
  const Eigen::Index n = h.size();
  const RadialGrid& grid = *h.grid;
  const Vec& u = grid.nodes;
  RadialOperator op;
  op.grid = h.grid;
  op.frame = h.label;
  op.c2.resize(n);
  op.c1.resize(n);
  op.reaction.assign(n, Eigen::Matrix4d::Zero());
  const Vec dG0 = derivative(Vec(w.G.col(0)), 1, grid, Parity::Even);
  Vec rem(n);
  for (Eigen::Index p = 1; p < n; ++p) {
    const double A = fg.A[p];
    op.c2[p] = w.G(p, 0) / A;
    double c1 = -0.5 * w.G(p, 0) * fg.dlnA[p];
    double r = -dG0[p];
    for (int i = 0; i < 3; ++i) {
      c1 += 0.5 * w.G(p, i + 1) * fg.ell(p, i);
      r += 0.5 * (w.G(p, i + 1) - w.G(p, 0)) * fg.ell(p, i);
    }
    op.c1[p] = c1 / A;
    rem[p] = r / A;
    if (w.extra_c1.size() == n) {
      op.c1[p] += w.extra_c1[p];
      rem[p] += w.extra_c1[p];
    }

    Eigen::Matrix4d& R = op.reaction[p];
    for (int i = 0; i < 3; ++i) {
      const double wt = 2.0 * w.G(p, i + 1);
      const double sq = fg.s(p, i) * fg.s(p, i);
      R(0, i + 1) += wt * sq;
      R(i + 1, 0) += wt * sq;
      R(0, 0) -= wt * sq;
      R(i + 1, i + 1) -= wt * sq;
      int j, m;
      complement(i, j, m);
      const double d2 = fg.D(p, i) * fg.D(p, i);
      R(j, m) += wt * d2;
      R(m, j) += wt * d2;
      R(j, j) -= wt * d2;
      R(m, m) -= wt * d2;
    }
    for (int b = 0; b < 4; ++b)
      for (int d = 0; d < 4; ++d) {
        if (b == d) continue;
        const double f = w.ghat ? (*w.ghat)(p, b) / (*w.ghat)(p, d) : 1.0;
        R(b, d) += 2.0 * f * fg.K[p](b, d);
      }
  }
  close_at_bolt(op.c2, grid, Parity::Even);
  op.c1[0] = 0.0;
  op.reaction[0] = op.reaction[1];

  // Volume density mu = u^m nu with nu even; m counts collapsing directions.
  int m = 0;
  for (int i = 1; i < 4; ++i) m += h.collapses(i) ? 1 : 0;
  Vec nu(n);
  const Vec mu = (fg.A * h.comps.col(1) * h.comps.col(2) * h.comps.col(3)).sqrt();
  nu.tail(n - 1) = mu.tail(n - 1) / u.tail(n - 1).pow(m);
  close_at_bolt(nu, grid, Parity::Even);
  Vec flux(n - 1);  // mu c2 at p + 1/2
  for (Eigen::Index p = 0; p + 1 < n; ++p) {
    const double um = 0.5 * (u[p] + u[p + 1]);
    flux[p] = std::pow(um, m) * 0.5 * (nu[p] + nu[p + 1]) * 0.5 * (op.c2[p] + op.c2[p + 1]);
  }
  op.stencil = Eigen::ArrayX3d::Zero(n, 3);
  for (Eigen::Index p = 1; p + 1 < n; ++p) {
    const double hm = u[p] - u[p - 1], hp = u[p + 1] - u[p];
    const double lo = 0.5 * (u[p - 1] + u[p]), hi = 0.5 * (u[p] + u[p + 1]);
    const double vol = nu[p] * (std::pow(hi, m + 1) - std::pow(lo, m + 1)) / (m + 1);
    const auto w1 = detail::first_derivative_weights(hm, hp);
    op.stencil(p, 0) = flux[p - 1] / (hm * vol) + rem[p] * w1.m;
    op.stencil(p, 2) = flux[p] / (hp * vol) + rem[p] * w1.p;
    op.stencil(p, 1) = -(flux[p - 1] / hm + flux[p] / hp) / vol + rem[p] * w1.c;
  }
  return op;
}

RadialOperator lichnerowicz_operator(const CohomMetric& h) {
  const FrameGeometry fg = frame_geometry(h);
  OperatorWeights w;
  w.G = Eigen::ArrayX4d::Ones(h.size(), 4);
  return assemble_operator(h, fg, w);
}

RadialOperator mixed_lichnerowicz_operator(const CohomMetric& g, const CohomMetric& h) {
  const FrameGeometry fg = frame_geometry(h);
  const Eigen::ArrayX4d ghat = 1.0 + difference(g, h).frame;
  OperatorWeights w;
  w.G = ghat.inverse();
  w.ghat = &ghat;
  return assemble_operator(h, fg, w);
}

InvariantTensor apply(const RadialOperator& op, const InvariantTensor& k) {
  if (k.reference != op.frame)
    throw ContractViolation("apply: tensor frame " + k.reference + " does not match operator frame " + op.frame);
  const RadialGrid& grid = *op.grid;
  const Eigen::Index n = grid.size();
  Eigen::ArrayX4d d1(n, 4), d2(n, 4);
  for (int c = 0; c < 4; ++c) {
    const Vec col = k.frame.col(c);
    d1.col(c) = derivative(col, 1, grid, Parity::Even);
    d2.col(c) = derivative(col, 2, grid, Parity::Even);
  }
  InvariantTensor out = InvariantTensor::zero(n, op.frame);
  for (Eigen::Index p = 1; p < n; ++p) {
    const Eigen::Vector4d kv = k.frame.row(p).matrix().transpose();
    const Eigen::Vector4d rk = op.reaction[p] * kv;
    for (int c = 0; c < 4; ++c) {
      const double diff = p + 1 < n ? op.stencil(p, 0) * k.frame(p - 1, c) + op.stencil(p, 1) * k.frame(p, c) +
                                          op.stencil(p, 2) * k.frame(p + 1, c)
                                    : op.c2[p] * d2(p, c) + op.c1[p] * d1(p, c);
      out.frame(p, c) = -(diff + rk[c]);
    }
  }
  close_tensor(out.frame, grid);
  return out;
}

InvariantTensor lichnerowicz(const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "lichnerowicz");
  return apply(lichnerowicz_operator(h), k);
}

InvariantTensor mixed_lichnerowicz(const CohomMetric& g, const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "mixed_lichnerowicz");
  return apply(mixed_lichnerowicz_operator(g, h), k);
}

InvariantTensor rough_laplacian(const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "rough_laplacian");
  FrameGeometry fg = frame_geometry(h);
  for (auto& K : fg.K) K.setZero();
  OperatorWeights w;
  w.G = Eigen::ArrayX4d::Ones(h.size(), 4);
  return apply(assemble_operator(h, fg, w), k);
}

ImplicitSolver::ImplicitSolver(const RadialOperator& op, double dt, double alpha)
    : n_(op.grid->size()), frame_(op.frame), grid_(op.grid) {
  const Vec& u = grid_->nodes;
  const double a1 = u[1] * u[1], a2 = u[2] * u[2];
  bolt_a_ = a2 / (a2 - a1);
  bolt_b_ = -a1 / (a2 - a1);

  const Eigen::Index m = n_ - 2;  // unknowns at nodes 1..n-2
  std::vector<Eigen::Matrix4d> M(m), C(m), P(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index p = j + 1;
    const double cm = op.stencil(p, 0), cc = op.stencil(p, 1), cp = op.stencil(p, 2);
    M[j] = -dt * cm * Eigen::Matrix4d::Identity();
    C[j] = (alpha - dt * cc) * Eigen::Matrix4d::Identity() - dt * op.reaction[p];
    P[j] = -dt * cp * Eigen::Matrix4d::Identity();
  }
  C[0] += bolt_a_ * M[0];
  P[0] += bolt_b_ * M[0];
  M[0].setZero();

  lower_.resize(m);
  upper_ = P;
  diag_inv_.resize(m);
  diag_inv_[0] = C[0].inverse();
  for (Eigen::Index j = 1; j < m; ++j) {
    lower_[j] = M[j] * diag_inv_[j - 1];
    diag_inv_[j] = (C[j] - lower_[j] * P[j - 1]).inverse();
  }
  for (const auto& D : diag_inv_)
    if (!D.allFinite()) throw NumericError("ImplicitSolver: singular block in factorisation");
}

InvariantTensor ImplicitSolver::solve(const InvariantTensor& rhs, const Eigen::Array4d& boundary) const {
  if (rhs.reference != frame_) throw ContractViolation("ImplicitSolver: rhs frame mismatch");
  const Eigen::Index m = n_ - 2;
  std::vector<Eigen::Vector4d> y(m);
  for (Eigen::Index j = 0; j < m; ++j) y[j] = rhs.frame.row(j + 1).matrix().transpose();
  y[m - 1] -= upper_[m - 1] * boundary.matrix();
  for (Eigen::Index j = 1; j < m; ++j) y[j] -= lower_[j] * y[j - 1];
  std::vector<Eigen::Vector4d> x(m);
  x[m - 1] = diag_inv_[m - 1] * y[m - 1];
  for (Eigen::Index j = m - 2; j >= 0; --j) x[j] = diag_inv_[j] * (y[j] - upper_[j] * x[j + 1]);

  InvariantTensor out = InvariantTensor::zero(n_, frame_);
  for (Eigen::Index j = 0; j < m; ++j) out.frame.row(j + 1) = x[j].transpose().array();
  out.frame.row(n_ - 1) = boundary.transpose();
  out.frame.row(0) = bolt_a_ * out.frame.row(1) + bolt_b_ * out.frame.row(2);
  if (!out.frame.allFinite()) throw NumericError("ImplicitSolver: non-finite solution");
  return out;
}

RadialVector deturck_field(const CohomMetric& g, const CohomMetric& h) {
  if (g.size() != h.size()) throw ContractViolation("deturck_field: grids differ");
  const FrameGeometry fg = frame_geometry(g), fh = frame_geometry(h);
  RadialVector V{Vec::Zero(g.size())};
  for (Eigen::Index p = 1; p < g.size(); ++p) {
    const double Ag = fg.A[p], Ah = fh.A[p];
    double v = (fg.dlnA[p] - fh.dlnA[p]) / (2.0 * Ag);
    for (int i = 0; i < 3; ++i)
      v += -fg.ell(p, i) / (2.0 * Ag) + fh.ell(p, i) * (h.comps(p, i + 1) / g.comps(p, i + 1)) / (2.0 * Ah);
    V.comp[p] = v;
  }
  return V;
}

RadialVector deturck_linear(const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "deturck_linear");
  const FrameGeometry fh = frame_geometry(h);
  const RadialGrid& grid = *h.grid;
  Eigen::ArrayX4d d(h.size(), 4);
  for (int c = 0; c < 4; ++c) d.col(c) = derivative(Vec(k.frame.col(c)), 1, grid, Parity::Even);
  RadialVector V{Vec::Zero(h.size())};
  for (Eigen::Index p = 1; p < h.size(); ++p) {
    double v = d(p, 0);
    for (int i = 0; i < 3; ++i) v -= d(p, i + 1) + fh.ell(p, i) * (k.frame(p, i + 1) - k.frame(p, 0));
    V.comp[p] = v / (2.0 * fh.A[p]);
  }
  return V;
}

namespace {

double fd_step(const InvariantTensor& k) {
  const double scale = k.frame.abs().maxCoeff();
  if (!(scale > 0.0)) return 0.0;
  const double s = std::cbrt(DBL_EPSILON) / scale;
  if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("directional derivative: step underflow");
  return s;
}

}  // namespace

RadialVector deturck_linearized(const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "deturck_linearized");
  const double s = fd_step(k);
  if (s == 0.0) return {Vec::Zero(h.size())};
  const RadialVector vp = deturck_field(perturb(h, s * k), h);
  const RadialVector vm = deturck_field(perturb(h, -s * k), h);
  return {(vp.comp - vm.comp) / (2.0 * s)};
}

InvariantTensor linearized_ricci(const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "linearized_ricci");
  const double s = fd_step(k);
  if (s == 0.0) return InvariantTensor::zero(h.size(), h.label);
  const CohomMetric gp = perturb(h, s * k), gm = perturb(h, -s * k);
  const InvariantTensor rp = reframe(ricci_tensor(gp), gp, h);
  const InvariantTensor rm = reframe(ricci_tensor(gm), gm, h);
  return (0.5 / s) * (rp - rm);
}

InvariantTensor lie_derivative(const RadialVector& X, const CohomMetric& g) {
  const FrameGeometry fg = frame_geometry(g);
  const Vec dX = derivative(X.comp, 1, *g.grid, Parity::Odd);
  InvariantTensor out = InvariantTensor::zero(g.size(), g.label);
  out.frame.col(0) = X.comp * fg.dlnA + 2.0 * dX;
  for (int i = 0; i < 3; ++i) out.frame.col(i + 1) = X.comp * fg.ell.col(i);
  close_tensor(out.frame, *g.grid);
  return out;
}

Vec vector_length(const RadialVector& V, const CohomMetric& g) {
  return g.comps.col(0).sqrt() * V.comp.abs();
}

TensorField as_tensor_field(const InvariantTensor& k) {
  TensorField T;
  T.rank = 2;
  T.comps = Eigen::ArrayXXd::Zero(k.size(), 16);
  for (int a = 0; a < 4; ++a) T.comps.col(5 * a) = k.frame.col(a);
  return T;
}

TensorField covariant_derivative(const CohomMetric& h, const FrameGeometry& fg, const TensorField& T) {
  const Eigen::Index n = h.size();
  const int r = T.rank;
  const int width = static_cast<int>(T.comps.cols());
  TensorField out;
  out.rank = r + 1;
  out.comps = Eigen::ArrayXXd::Zero(n, 4 * width);
  const RadialGrid& grid = *h.grid;
  const Vec N = fg.A.sqrt();

  // E_0 acts by d/du / N; the invariant tangential derivatives vanish.
  for (int col = 0; col < width; ++col) {
    const Vec d = derivative(Vec(T.comps.col(col)), 1, grid, Parity::Even);
    out.comps.col(col) = d / N;
  }

  std::vector<int> pw(r + 1, 1);
  for (int j = r - 1; j >= 0; --j) pw[j] = pw[j + 1] * 4;
  for (Eigen::Index p = 1; p < n; ++p) {
    // Gamma(c, a, d) = <nabla_{E_c} E_a, E_d>
    double G[4][4][4] = {};
    for (int i = 0; i < 3; ++i) {
      G[i + 1][0][i + 1] = fg.s(p, i);
      G[i + 1][i + 1][0] = -fg.s(p, i);
      int j, m;
      complement(i, j, m);
      G[i + 1][j][m] = -fg.D(p, i);
      G[i + 1][m][j] = fg.D(p, i);
    }
    for (int c = 1; c < 4; ++c)
      for (int col = 0; col < width; ++col) {
        double acc = 0.0;
        for (int slot = 0; slot < r; ++slot) {
          const int a = (col / pw[slot + 1]) % 4;
          for (int d = 0; d < 4; ++d) {
            const double gam = G[c][a][d];
            if (gam == 0.0) continue;
            const int src = col + (d - a) * pw[slot + 1];
            acc += gam * T.comps(p, src);
          }
        }
        out.comps(p, c * width + col) = -acc;
      }
  }
  for (int col = 0; col < 4 * width; ++col) {
    Vec v = out.comps.col(col);
    close_at_bolt(v, grid, Parity::Even);
    out.comps(0, col) = v[0];
  }
  return out;
}

Vec pointwise_norm(const TensorField& T) { return T.comps.square().rowwise().sum().sqrt(); }

InvariantTensor heat_semigroup(const CohomMetric& h, const InvariantTensor& k0, double t, const DtPolicy& policy) {
  require_frame(k0, h, "heat_semigroup");
  if (t < 0.0) throw DomainError("heat_semigroup: negative time");
  if (t == 0.0) return k0;
  if (!(policy.dt0 > 0.0) || !(policy.growth >= 1.0)) throw ConfigError("heat_semigroup: bad step policy");
  const RadialOperator op = lichnerowicz_operator(h);
  InvariantTensor prev = k0, cur = k0;
  double time = 0.0, dt = policy.dt0, dt_prev = 0.0;
  int step = 0;
  while (time < t * (1.0 - 1e-14)) {
    double h_step = std::min(dt, t - time);
    if (t - time - h_step < 1e-3 * h_step) h_step = t - time;
    InvariantTensor next;
    if (policy.scheme == Scheme::BDF2 && step > 0) {
      const double w = h_step / dt_prev;
      const double alpha = (1.0 + 2.0 * w) / (1.0 + w);
      const InvariantTensor rhs = (1.0 + w) * cur - (w * w / (1.0 + w)) * prev;
      next = ImplicitSolver(op, h_step, alpha).solve(rhs);
    } else {
      next = ImplicitSolver(op, h_step).solve(cur);
    }
    prev = cur;
    cur = next;
    time += h_step;
    dt_prev = h_step;
    dt = std::min(dt * policy.growth, policy.dt_max);
    ++step;
  }
  return cur;
}

double EvolutionSchedule::switch_time() const { return std::max(t - 1.0, s); }

std::vector<ScheduleLeg> EvolutionSchedule::legs() const {
  std::vector<ScheduleLeg> out;
  const double sw = switch_time();
  if (sw > s) out.push_back({Generator::LichnerowiczInfinity, s, sw});
  if (t > sw) out.push_back({Generator::Mixed, sw, t});
  return out;
}

EvolutionSchedule make_schedule(double s, double t, double dt) {
  if (t < s) throw DomainError("make_schedule: t < s");
  if (s < 1.0) throw DomainError("make_schedule: s must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("make_schedule: dt must be positive");
  return {s, t, dt};
}

namespace {

struct Step {
  Generator generator;
  double from, dt;
};

std::vector<Step> schedule_steps(const EvolutionSchedule& sc) {
  std::vector<Step> steps;
  for (const auto& leg : sc.legs()) {
    const double len = leg.to - leg.from;
    const int count = std::max(1, static_cast<int>(std::lround(len / sc.dt)));
    const double dt = len / count;
    for (int i = 0; i < count; ++i) steps.push_back({leg.generator, leg.from + i * dt, dt});
  }
  return steps;
}

InvariantTensor advance(const Step& st, const MetricPath& g_path, const MetricPath& h_path,
                        const CohomMetric& h_inf, const RadialOperator* inf_op, const InvariantTensor& x) {
  if (st.generator == Generator::LichnerowiczInfinity) return ImplicitSolver(*inf_op, st.dt).solve(x);
  const CohomMetric g = g_path(st.from), h = h_path(st.from);
  const InvariantTensor xh = reframe(x, h_inf, h);
  const InvariantTensor yh = ImplicitSolver(mixed_lichnerowicz_operator(g, h), st.dt).solve(xh);
  return reframe(yh, h, h_inf);
}

}  // namespace

InvariantTensor mixed_evolution(const EvolutionSchedule& schedule, const MetricPath& g_path,
                                const MetricPath& h_path, const CohomMetric& h_inf,
                                const InvariantTensor& k_s) {
  require_frame(k_s, h_inf, "mixed_evolution");
  if (schedule.t < schedule.s) throw DomainError("mixed_evolution: t < s");
  const RadialOperator inf_op = lichnerowicz_operator(h_inf);
  InvariantTensor x = k_s;
  for (const auto& st : schedule_steps(schedule)) x = advance(st, g_path, h_path, h_inf, &inf_op, x);
  return x;
}

InvariantTensor duhamel(const EvolutionSchedule& schedule, const MetricPath& g_path, const MetricPath& h_path,
                        const CohomMetric& h_inf, const InvariantTensor& k_s,
                        const std::vector<InvariantTensor>& source) {
  const auto steps = schedule_steps(schedule);
  if (source.size() < steps.size()) throw ContractViolation("duhamel: source must be sampled at every step");
  const RadialOperator inf_op = lichnerowicz_operator(h_inf);
  InvariantTensor q = mixed_evolution(schedule, g_path, h_path, h_inf, k_s);
  for (std::size_t m = 0; m < steps.size(); ++m) {
    require_frame(source[m], h_inf, "duhamel");
    InvariantTensor x = steps[m].dt * source[m];
    for (std::size_t j = m; j < steps.size(); ++j) x = advance(steps[j], g_path, h_path, h_inf, &inf_op, x);
    q = q + x;
  }
  return q;
}

InvariantTensor duhamel_stepping(const EvolutionSchedule& schedule, const MetricPath& g_path,
                                 const MetricPath& h_path, const CohomMetric& h_inf, const InvariantTensor& k_s,
                                 const std::vector<InvariantTensor>& source) {
  require_frame(k_s, h_inf, "duhamel_stepping");
  const auto steps = schedule_steps(schedule);
  if (source.size() < steps.size()) throw ContractViolation("duhamel: source must be sampled at every step");
  const RadialOperator inf_op = lichnerowicz_operator(h_inf);
  InvariantTensor x = k_s;
  for (std::size_t m = 0; m < steps.size(); ++m)
    x = advance(steps[m], g_path, h_path, h_inf, &inf_op, x + steps[m].dt * source[m]);
  return x;
}

}  // namespace alelab
