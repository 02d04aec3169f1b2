#include "alelab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "alelab/errors.hpp"
#include "alelab/norms.hpp"

namespace alelab {

namespace {

void close_rows(Eigen::ArrayX4d& f, const RadialGrid& grid) {
  for (int c = 0; c < 4; ++c) {
    Vec col = f.col(c);
    close_at_bolt(col, grid, Parity::Even);
    f(0, c) = col[0];
  }
}

double tcomp(const TensorField& T, Eigen::Index p, int c, int a, int b) { return T.comps(p, c * 16 + a * 4 + b); }

void check_equivalence(const Eigen::ArrayX4d& ghat, const char* where) {
  if (!ghat.allFinite() || ghat.minCoeff() < 0.5 || ghat.maxCoeff() > 2.0)
    throw FlowBlowupError(std::string(where) + ": metric left the [0.5, 2] band around the reference (min " +
                          std::to_string(ghat.minCoeff()) + ", max " + std::to_string(ghat.maxCoeff()) + ")");
}

}  // namespace

RdtTerms rdt_terms(const CohomMetric& g, const CohomMetric& h) {
  if (g.size() != h.size()) throw ContractViolation("rdt_terms: grids differ");
  const Eigen::Index n = h.size();
  RdtTerms t;
  t.k = difference(g, h);
  t.ghat = 1.0 + t.k.frame;
  if (!(t.ghat.minCoeff() > 0.0)) throw FlowBlowupError("rdt_terms: g is degenerate");
  t.G = t.ghat.inverse();
  const FrameGeometry fh = frame_geometry(h);
  t.grad_k = covariant_derivative(h, fh, as_tensor_field(t.k));
  const TensorField& T = t.grad_k;

  t.W0 = Vec::Zero(n);
  t.F1 = InvariantTensor::zero(n, h.label);
  t.F4 = InvariantTensor::zero(n, h.label);
  t.F5 = InvariantTensor::zero(n, h.label);
  t.Rm = InvariantTensor::zero(n, h.label);
  for (Eigen::Index p = 0; p < n; ++p) {
    double W[4];
    for (int b = 0; b < 4; ++b) {
      W[b] = 0.0;
      for (int a = 0; a < 4; ++a) W[b] += t.G(p, a) * t.G(p, b) * tcomp(T, p, a, a, b);
    }
    t.W0[p] = W[0];
    // Shi's expansion; the last two products enter with a minus sign.
    for (int i = 0; i < 4; ++i) {
      double f1 = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int q = 0; q < 4; ++q) {
          const double Tiqa = tcomp(T, p, i, q, a), Taiq = tcomp(T, p, a, i, q), Tqia = tcomp(T, p, q, i, a);
          f1 += t.G(p, a) * t.G(p, q) * (0.5 * Tiqa * Tiqa + Taiq * Tqia - Taiq * Taiq - 2.0 * Tiqa * Taiq);
        }
      t.F1.frame(p, i) = f1;
      double f4 = f1;
      for (int b = 0; b < 4; ++b) f4 += W[b] * tcomp(T, p, b, i, i);
      t.F4.frame(p, i) = f4;
    }
    if (p == 0) continue;
    for (int i = 0; i < 4; ++i) {
      double f5 = 0.0, rm = 0.0;
      for (int d = 0; d < 4; ++d) {
        if (d == i) continue;
        f5 += t.G(p, d) * fh.K[p](i, d) * t.k.frame(p, d);
        rm += fh.K[p](i, d) * t.k.frame(p, d);
      }
      t.F5.frame(p, i) = 2.0 * t.ghat(p, i) * f5;
      t.Rm.frame(p, i) = rm;
    }
  }
  close_rows(t.F5.frame, *h.grid);
  close_rows(t.Rm.frame, *h.grid);
  return t;
}

namespace {

InvariantTensor rdt_rhs_raw(const CohomMetric& g, const CohomMetric& h, FlowForm form) {
  const RdtTerms t = rdt_terms(g, h);
  if (form == FlowForm::RdT1) return t.F1 - mixed_lichnerowicz(g, h, t.k);

  // sum_a G_a nabla^2_aa k from the curvature-free operator with weights G.
  FrameGeometry fh = frame_geometry(h);
  for (auto& K : fh.K) K.setZero();
  OperatorWeights w;
  w.G = t.G;
  const InvariantTensor rough = apply(assemble_operator(h, fh, w), t.k);
  InvariantTensor transport = InvariantTensor::zero(h.size(), h.label);
  const Vec N = fh.A.sqrt();
  for (int c = 0; c < 4; ++c)
    transport.frame.col(c) = t.W0 * derivative(Vec(t.k.frame.col(c)), 1, *h.grid, Parity::Even) / N;
  return (t.F4 + t.F5) - rough - transport;
}

}  // namespace

InvariantTensor rdt_rhs(const CohomMetric& g, const CohomMetric& h, FlowForm form) {
  InvariantTensor out = rdt_rhs_raw(g, h, form);
  // The bolt value is the even closure of the interior, as in the implicit solver.
  close_rows(out.frame, *h.grid);
  return out;
}

InvariantTensor rdt_rhs_direct(const CohomMetric& g, const CohomMetric& h) {
  const RadialVector V = deturck_field(g, h);
  const InvariantTensor rhs = lie_derivative(V, g) - 2.0 * ricci_tensor(g);
  return reframe(rhs, g, h);
}

RadialOperator rdt_implicit_operator(const CohomMetric& h, const RdtTerms& terms) {
  const FrameGeometry fh = frame_geometry(h);
  OperatorWeights w;
  w.G = terms.G;
  w.extra_c1 = -terms.W0 / fh.A.sqrt();
  return assemble_operator(h, fh, w);
}

CohomMetric rdt_step(const CohomMetric& g, const CohomMetric& h, double dt) {
  if (!(dt > 0.0)) throw ConfigError("rdt_step: dt must be positive");
  const RdtTerms t = rdt_terms(g, h);
  check_equivalence(t.ghat, "rdt_step");
  const RadialOperator op = rdt_implicit_operator(h, t);
  const InvariantTensor rhs = t.k + dt * ((t.F4 + t.F5) - 2.0 * t.Rm);
  const Eigen::Array4d boundary = t.k.frame.row(h.size() - 1).transpose();
  const InvariantTensor kn = ImplicitSolver(op, dt).solve(rhs, boundary);
  check_equivalence(1.0 + kn.frame, "rdt_step");
  return perturb(h, kn);
}

namespace {

constexpr int kResidualSkip = 4;  // outer nodes excluded from the PDE residual

double interior_l2(const InvariantTensor& x, const CohomMetric& h) {
  Vec pw = x.frame.square().rowwise().sum().sqrt();
  pw.tail(kResidualSkip).setZero();
  return lp_of_pointwise(pw, 2.0, h);
}

double step_residual(const CohomMetric& g, const CohomMetric& gn, const CohomMetric& h, double dt) {
  const InvariantTensor dg = (1.0 / dt) * (difference(gn, h) - difference(g, h));
  return interior_l2(dg - rdt_rhs_direct(g, h), h);
}

ProjectionResult project_warm(const CohomMetric& g, double eps_prev, double rel) {
  if (eps_prev > 0.0 && rel > 0.0) {
    ProjectionOptions o;
    o.lo = eps_prev * (1.0 - rel);
    o.hi = eps_prev * (1.0 + rel);
    o.scan_points = 8;
    try {
      return moduli_projection(g, o);
    } catch (const ProjectionDomainError&) {
    }
  }
  return moduli_projection(g);
}

CohomMetric chart_metric(const CohomMetric& g) {
  return g.chart_eps > 0.0 ? eguchi_hanson(g.chart_eps, g.grid) : flat_metric(g.grid);
}

std::vector<double> event_times(const FlowOptions& o, bool moving) {
  std::vector<double> ev = o.snapshot_times;
  for (double t : ev)
    if (!(t >= 0.0) || t > o.t_end * (1.0 + 1e-12)) throw ConfigError("flow: snapshot time outside [0, t_end]");
  ev.push_back(o.t_end);
  if (moving && o.switch_time > 0.0 && o.switch_time < o.t_end) ev.push_back(o.switch_time);
  std::sort(ev.begin(), ev.end());
  std::vector<double> out;
  for (double t : ev)
    if (t > 0.0 && (out.empty() || t > out.back() * (1.0 + 1e-12))) out.push_back(t);
  return out;
}

Trajectory run_flow(const CohomMetric& g0, const CohomMetric& h_hat, const FlowOptions& o, bool moving) {
  if (!(o.t_end > 0.0)) throw ConfigError("flow: t_end must be positive");
  if (!(o.dt.dt0 > 0.0) || !(o.dt.growth >= 1.0) || !(o.dt.dt_max >= o.dt.dt0))
    throw ConfigError("flow: bad step policy");
  if (g0.size() != h_hat.size()) throw ContractViolation("flow: grids differ");
  const std::vector<double> events = event_times(o, moving);
  std::vector<double> snaps = o.snapshot_times;
  snaps.push_back(0.0);
  snaps.push_back(o.t_end);

  Trajectory traj;
  traj.background = h_hat;
  CohomMetric g = g0, h = h_hat;
  double eps = h_hat.eps, eps_rate = 0.0, last_residual = 0.0;
  bool gauged = false;  // h = Phi(g)
  InvariantTensor k = difference(g, h);
  auto reproject = [&]() {
    const ProjectionResult pr = project_warm(g, gauged ? eps : 0.0, o.warm_bracket);
    h = pr.point.h;
    eps = pr.point.eps;
    k = pr.k;
    gauged = true;
  };
  auto is_snapshot = [&](double t) {
    for (double s : snaps)
      if (std::abs(s - t) <= 1e-12 * std::max(1.0, t)) return true;
    return false;
  };
  auto record = [&](double t) {
    Snapshot s;
    s.t = t;
    s.g = g;
    s.h = h;
    s.k = k;
    s.eps = eps;
    if (gauged) s.dh_dt = eps_rate * eh_family_tangent(h);
    traj.snapshots.push_back(s);
    DiagnosticsRow row = diagnostics_row(t, g, h, eps);
    row.residual = last_residual;
    traj.rows.push_back(row);
  };

  if (moving && o.switch_time <= 0.0) reproject();
  record(0.0);
  double time = 0.0, dt = o.dt.dt0;
  std::size_t next = 0;
  while (next < events.size()) {
    const double target = events[next];
    double step = std::min(dt, target - time);
    if (target - time - step < 1e-3 * step) step = target - time;
    CohomMetric gn;
    for (int attempt = 0;; ++attempt) {
      try {
        gn = rdt_step(g, h, step);
        break;
      } catch (const NumericError&) {
        if (attempt >= 12) throw;
        step *= 0.5;
        dt = step;
      }
    }
    if (o.record_residual) last_residual = step_residual(g, gn, h, step);
    const bool hit = step == target - time;
    time = hit ? target : time + step;
    g = gn;
    if (moving && time >= o.switch_time * (1.0 - 1e-12)) {
      const double eps_old = eps;
      const bool was_gauged = gauged;
      reproject();
      eps_rate = was_gauged ? (eps - eps_old) / step : 0.0;
    } else {
      k = difference(g, h);
    }
    if (hit) {
      if (is_snapshot(time)) record(time);
      ++next;
    }
    dt = std::min(dt * o.dt.growth, o.dt.dt_max);
  }
  return traj;
}

}  // namespace

Trajectory run_fixed_gauge(const CohomMetric& g0, const CohomMetric& h_hat, const FlowOptions& options) {
  return run_flow(g0, h_hat, options, false);
}

Trajectory run_moving_gauge(const CohomMetric& g0, const FlowOptions& options) {
  return run_flow(g0, chart_metric(g0), options, true);
}

DiagnosticsRow diagnostics_row(double t, const CohomMetric& g, const CohomMetric& h, double eps) {
  DiagnosticsRow row;
  row.t = t;
  const InvariantTensor k = difference(g, h);
  const Vec pk = k.frame.square().rowwise().sum().sqrt();
  row.L2_k = lp_of_pointwise(pk, 2.0, h);
  row.L4_k = lp_of_pointwise(pk, 4.0, h);
  row.Linf_k = pk.maxCoeff();
  NormSpec w12;
  w12.kind = NormKind::Wkp;
  w12.k = 1;
  w12.p = 2.0;
  row.W12_k = norm(k, w12, h);
  row.V_C0 = vector_length(deturck_field(g, h), g).maxCoeff();
  const InvariantTensor ric = ricci_tensor(g);
  row.Ric_C0 = ric.frame.square().rowwise().sum().sqrt().maxCoeff();
  const Vec sc = ric.frame.rowwise().sum();
  row.scal_min = sc.minCoeff();
  row.scal_max = sc.maxCoeff();
  row.eps = eps;
  return row;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_trajectory_csv: cannot open " + path);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "t,L2_k,L4_k,Linf_k,W12_k,V_C0,Ric_C0,scal_min,scal_max,eps,residual\n";
  char buf[64];
  for (const auto& r : traj.rows) {
    const double v[] = {r.t, r.L2_k, r.L4_k, r.Linf_k, r.W12_k, r.V_C0, r.Ric_C0, r.scal_min, r.scal_max, r.eps, r.residual};
    for (std::size_t i = 0; i < std::size(v); ++i) {
      std::snprintf(buf, sizeof buf, "%.12e", v[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

double column_value(const DiagnosticsRow& row, const std::string& column) {
  static const std::map<std::string, double DiagnosticsRow::*> cols = {
      {"t", &DiagnosticsRow::t},           {"L2_k", &DiagnosticsRow::L2_k},
      {"L4_k", &DiagnosticsRow::L4_k},     {"Linf_k", &DiagnosticsRow::Linf_k},
      {"W12_k", &DiagnosticsRow::W12_k},   {"V_C0", &DiagnosticsRow::V_C0},
      {"Ric_C0", &DiagnosticsRow::Ric_C0}, {"scal_min", &DiagnosticsRow::scal_min},
      {"scal_max", &DiagnosticsRow::scal_max}, {"eps", &DiagnosticsRow::eps},
      {"residual", &DiagnosticsRow::residual}};
  const auto it = cols.find(column);
  if (it == cols.end()) throw ConfigError("unknown diagnostics column '" + column + "'");
  return row.*(it->second);
}

std::vector<NamedFit> flow_diagnostics(const Trajectory& traj, const std::vector<FitRequest>& requests) {
  std::vector<NamedFit> out;
  for (const auto& req : requests) {
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : traj.rows)
      if (row.t >= req.t_lo * (1.0 - 1e-12) && row.t <= req.t_hi * (1.0 + 1e-12) && row.t > 0.0)
        samples.emplace_back(row.t, column_value(row, req.column));
    out.push_back({req.column, fit_power_law(samples, req.allow_log, 1e-10)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Picard iteration

namespace {

struct FineMesh {
  std::vector<double> t;
  double dt = 0.0;
  int window = 0;  // steps per unit time
};

FineMesh fine_mesh(double t_end, double dt) {
  if (!(t_end > 1.0) || !(dt > 0.0)) throw ConfigError("picard: need t_end > 1 and dt > 0");
  FineMesh m;
  m.window = std::max(1, static_cast<int>(std::lround(1.0 / dt)));
  m.dt = 1.0 / m.window;
  const int steps = static_cast<int>(std::lround((t_end - 1.0) / m.dt));
  for (int i = 0; i <= steps; ++i) m.t.push_back(1.0 + i * m.dt);
  return m;
}

std::vector<std::size_t> output_indices(const std::vector<double>& t, double ratio) {
  std::vector<std::size_t> idx{0};
  double next = t.front() * ratio;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] >= next * (1.0 - 1e-12)) {
      idx.push_back(i);
      while (next <= t[i] * (1.0 + 1e-12)) next *= ratio;
    }
  if (idx.back() + 1 != t.size()) idx.push_back(t.size() - 1);
  return idx;
}

std::vector<double> eps_rates(const std::vector<CohomMetric>& h, double dt) {
  const std::size_t n = h.size();
  std::vector<double> r(n, 0.0);
  if (n < 2) return r;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? n - 1 : i + 1;
    r[i] = (h[b].eps - h[a].eps) / ((b - a) * dt);
  }
  return r;
}

double y_distance(const PicardState& a, const PicardState& b, const CohomMetric& bg, const std::vector<std::size_t>& idx,
                  double dt, double q, double r) {
  const double n = 4.0;
  const double beta = std::min(1.0, 0.5 * n * (1.0 / q - 1.0 / r));
  const double zeta = n * (1.0 / q - 1.0 / r);
  const auto ra = eps_rates(a.h, dt), rb = eps_rates(b.h, dt);
  double x = 0.0, z = 0.0;
  for (std::size_t i : idx) {
    const double t = a.times[i];
    const InvariantTensor dk = reframe(a.k[i], a.h[i], bg) - reframe(b.k[i], b.h[i], bg);
    const auto dn = derivative_norms(dk, bg, 2);
    const double w2r = lp_of_pointwise(dn[0], r, bg) + lp_of_pointwise(dn[1], r, bg) + lp_of_pointwise(dn[2], r, bg);
    x = std::max(x, lp_of_pointwise(dn[0], q, bg) + std::sqrt(t) * lp_of_pointwise(dn[1], q, bg) +
                        std::pow(t, beta) * (lp_of_pointwise(dn[2], q, bg) + w2r));
    const InvariantTensor dh = difference(a.h[i], bg) - difference(b.h[i], bg);
    const InvariantTensor ddh = reframe(ra[i] * eh_family_tangent(a.h[i]), a.h[i], bg) -
                                reframe(rb[i] * eh_family_tangent(b.h[i]), b.h[i], bg);
    z = std::max(z, lp_of_pointwise(derivative_norms(dh, bg, 0)[0], q, bg) +
                        std::pow(t, zeta) * lp_of_pointwise(derivative_norms(ddh, bg, 0)[0], q, bg));
  }
  return x + z;
}

// One application of psi to (h, k) on the fine mesh.
PicardState picard_map(const PicardState& in, const FineMesh& mesh) {
  const std::size_t N = in.times.size();
  const double dt = mesh.dt;
  const CohomMetric& h_inf = in.h.back();
  const KernelBasis basis_inf = kernel_basis_of(h_inf);
  auto perp_inf = [&](const InvariantTensor& x) { return project(h_inf, basis_inf, x, Projection::Perp); };
  const RadialOperator lich_inf = lichnerowicz_operator(h_inf);

  std::vector<InvariantTensor> Ia(N), Ib(N), dphi(N);
  std::vector<ImplicitSolver> mixed;
  mixed.reserve(N);
  for (std::size_t j = 0; j < N; ++j) {
    const CohomMetric& h = in.h[j];
    const InvariantTensor& k = in.k[j];
    const CohomMetric g = perturb(h, k);
    const ModuliPoint at{h, h.eps};
    const RdtTerms terms = rdt_terms(g, h);
    const RadialOperator mix = mixed_lichnerowicz_operator(g, h);
    const InvariantTensor lich_k = lichnerowicz(h, k);
    const InvariantTensor mix_k = apply(mix, k);
    // H1 = d_t g + Delta_{L,h} k, H2 = F1.
    const InvariantTensor H1 = (terms.F1 - mix_k) + lich_k;
    const InvariantTensor& H2 = terms.F1;
    dphi[j] = moduli_derivative(g, at, H1);

    const InvariantTensor k_inf = reframe(k, h, h_inf);
    Ia[j] = perp_inf(apply(lich_inf, k_inf) - reframe(lich_k, h, h_inf) + reframe(H1 - dphi[j], h, h_inf));

    const InvariantTensor kbar_h = reframe(perp_inf(k_inf), h_inf, h);
    const InvariantTensor commutator =
        reframe(apply(mix, kbar_h), h, h_inf) - perp_inf(reframe(mix_k, h, h_inf));
    const InvariantTensor inner = moduli_derivative(g, at, mix_k - lich_k) + (H2 - moduli_derivative(g, at, H2));
    Ib[j] = commutator + perp_inf(reframe(inner, h, h_inf));
    mixed.emplace_back(mix, dt);
  }

  PicardState out;
  out.times = in.times;
  out.iterations = in.iterations + 1;
  out.distances = in.distances;

  // psi_1: h_1 + int D_g Phi(H_1), then Phi.
  Eigen::ArrayX4d acc = Eigen::ArrayX4d::Zero(in.h[0].size(), 4);
  double eps_prev = in.h[0].eps;
  for (std::size_t n = 0; n < N; ++n) {
    if (n > 0) acc += dt * in.h[n - 1].comps * dphi[n - 1].frame;
    CohomMetric bar = in.h[0];
    bar.comps += acc;
    bar.label = fresh_label("psi1bar");
    bar.eps = eps_prev;
    const ProjectionResult pr = n == 0 ? ProjectionResult{{in.h[0], in.h[0].eps}, {}, 0.0}
                                       : project_warm(bar, eps_prev, 0.05);
    out.h.push_back(pr.point.h);
    eps_prev = pr.point.eps;
  }

  // psi_2: Delta_{L,inf} sweep with I_a sources, then the mixed leg over the last unit of time.
  const ImplicitSolver inf_solver(lich_inf, dt);
  const std::size_t W = static_cast<std::size_t>(mesh.window);
  std::vector<InvariantTensor> U{perp_inf(reframe(in.k[0], in.h[0], h_inf))};
  for (std::size_t m = 0; m + W < N; ++m) U.push_back(inf_solver.solve(U.back() + dt * Ia[m]));
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t j0 = n > W ? n - W : 0;
    InvariantTensor x = U[j0];
    for (std::size_t j = j0; j < n; ++j) {
      const CohomMetric& h = in.h[j];
      x = reframe(mixed[j].solve(reframe(x + dt * Ib[j], h_inf, h)), h, h_inf);
    }
    const CohomMetric& hn = out.h[n];
    out.k.push_back(transfer_inverse(hn, h_inf, kernel_basis_of(hn), basis_inf, x));
  }
  return out;
}

}  // namespace

PicardState picard_solve(const CohomMetric& h1, const InvariantTensor& k1, const PicardOptions& options) {
  require_frame(k1, h1, "picard_solve");
  if (options.max_iters < 1) throw ConfigError("picard_solve: max_iters must be >= 1");
  const FineMesh mesh = fine_mesh(options.t_end, options.dt);
  const auto idx = output_indices(mesh.t, options.output_ratio);

  // h = h1, k_t = e^{-(t-1) Delta_{L,h1}} k1.
  PicardState cur;
  cur.times = mesh.t;
  const ImplicitSolver heat(lichnerowicz_operator(h1), mesh.dt);
  InvariantTensor k = k1;
  for (std::size_t i = 0; i < mesh.t.size(); ++i) {
    if (i > 0) k = heat.solve(k);
    cur.h.push_back(h1);
    cur.k.push_back(k);
  }
  if (k1.frame.abs().maxCoeff() == 0.0) return cur;

  int growing = 0;
  for (int it = 0; it < options.max_iters; ++it) {
    PicardState next = picard_map(cur, mesh);
    const double d = y_distance(next, cur, h1, idx, mesh.dt, options.q, options.r);
    next.distances.push_back(d);
    const auto& ds = next.distances;
    if (ds.size() >= 2 && ds.back() >= ds[ds.size() - 2])
      ++growing;
    else
      growing = 0;
    cur = std::move(next);
    if (growing >= 3) {
      std::string msg = "picard_solve: contraction factor >= 1 over 3 iterations; distances";
      for (double v : ds) msg += " " + std::to_string(v);
      throw NonContractionError(msg);
    }
    if (d <= options.tol) break;
  }
  return cur;
}

Trajectory picard_trajectory(const PicardState& state, const CohomMetric& background, double ratio) {
  Trajectory traj;
  traj.background = background;
  if (state.times.empty()) return traj;
  const double dt = state.times.size() > 1 ? state.times[1] - state.times[0] : 1.0;
  const auto rates = eps_rates(state.h, dt);
  for (std::size_t i : output_indices(state.times, ratio)) {
    Snapshot s;
    s.t = state.times[i];
    s.h = state.h[i];
    s.k = state.k[i];
    s.g = perturb(state.h[i], state.k[i]);
    s.eps = state.h[i].eps;
    s.dh_dt = rates[i] * eh_family_tangent(state.h[i]);
    traj.rows.push_back(diagnostics_row(s.t, s.g, state.h[i], s.eps));
    traj.snapshots.push_back(std::move(s));
  }
  return traj;
}

}  // namespace alelab
