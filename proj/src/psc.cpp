#include "alelab/psc.hpp"

#include <algorithm>
#include <cmath>

#include "alelab/errors.hpp"
#include "alelab/norms.hpp"

namespace alelab {

namespace {

int collapsing_count(const CohomMetric& h) {
  int m = 0;
  for (int i = 1; i < 4; ++i) m += h.collapses(i) ? 1 : 0;
  return m;
}

// Tridiagonal finite-volume weights: (L f)_p = lo_p f_{p-1} + mid_p f_p + hi_p f_{p+1}.
struct Tridiag {
  Vec lo, mid, hi;
};

Tridiag fv_laplacian(const CohomMetric& h) {
  const Eigen::Index n = h.size();
  const Vec& u = h.nodes();
  const int m = collapsing_count(h);
  const Vec mu = h.comps.rowwise().prod().sqrt();
  Vec nu(n);
  nu.tail(n - 1) = mu.tail(n - 1) / u.tail(n - 1).pow(m);
  close_at_bolt(nu, *h.grid, Parity::Even);
  const Vec A = h.comps.col(0);
  Vec flux(n - 1);  // mu / A at p + 1/2, divided by the gap
  for (Eigen::Index p = 0; p + 1 < n; ++p) {
    const double um = 0.5 * (u[p] + u[p + 1]);
    flux[p] = std::pow(um, m) * 0.5 * (nu[p] + nu[p + 1]) / (0.5 * (A[p] + A[p + 1])) / (u[p + 1] - u[p]);
  }
  Tridiag L{Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
  for (Eigen::Index p = 0; p + 1 < n; ++p) {
    const double lo = p == 0 ? 0.0 : 0.5 * (u[p - 1] + u[p]), hi = 0.5 * (u[p] + u[p + 1]);
    const double vol = nu[p] * (std::pow(hi, m + 1) - std::pow(lo, m + 1)) / (m + 1);
    if (p > 0) L.lo[p] = flux[p - 1] / vol;
    L.hi[p] = flux[p] / vol;
    L.mid[p] = -(L.lo[p] + L.hi[p]);
  }
  return L;
}

Vec gradient_sq(const CohomMetric& h, const Vec& f) {
  const Vec d = derivative(f, 1, *h.grid, Parity::Even);
  return d.square() / h.comps.col(0);
}

}  // namespace

Vec laplace_beltrami(const CohomMetric& h, const Vec& f) {
  if (f.size() != h.size()) throw ContractViolation("laplace_beltrami: size mismatch");
  const Tridiag L = fv_laplacian(h);
  const Eigen::Index n = h.size();
  Vec out = Vec::Zero(n);
  for (Eigen::Index p = 0; p + 1 < n; ++p)
    out[p] = (p > 0 ? L.lo[p] * f[p - 1] : 0.0) + L.mid[p] * f[p] + L.hi[p] * f[p + 1];
  return out;
}

Vec solve_poisson(const CohomMetric& h, const Vec& rhs) {
  if (rhs.size() != h.size()) throw ContractViolation("solve_poisson: size mismatch");
  const Tridiag L = fv_laplacian(h);
  const Eigen::Index n = h.size();
  // Thomas algorithm on nodes 0..n-2 for L u = -rhs, u_{n-1} = 0.
  const Eigen::Index m = n - 1;
  Vec c(m), d(m);
  double beta = L.mid[0];
  c[0] = L.hi[0] / beta;
  d[0] = -rhs[0] / beta;
  for (Eigen::Index p = 1; p < m; ++p) {
    beta = L.mid[p] - L.lo[p] * c[p - 1];
    if (!(std::abs(beta) > 0.0)) throw NumericError("solve_poisson: singular pivot");
    c[p] = L.hi[p] / beta;
    d[p] = (-rhs[p] - L.lo[p] * d[p - 1]) / beta;
  }
  Vec u = Vec::Zero(n);
  u[m - 1] = d[m - 1];
  for (Eigen::Index p = m - 2; p >= 0; --p) u[p] = d[p] - c[p] * u[p + 1];
  if (!u.allFinite()) throw NumericError("solve_poisson: non-finite solution");
  return u;
}

Vec conformal_scal(const CohomMetric& h, const Vec& u) {
  const Vec phi = 1.0 + u;
  if (!(phi.minCoeff() > 0.0)) throw DomainError("conformal_scal: 1 + u must be positive");
  return -3.0 * laplace_beltrami(h, u) / phi.square() + 1.5 * gradient_sq(h, u) / phi.cube();
}

CohomMetric conformal_metric(const CohomMetric& h, const Vec& u) {
  CohomMetric g = h;
  for (int c = 0; c < 4; ++c) g.comps.col(c) *= 1.0 + u;
  g.label = fresh_label("conformal");
  return g;
}

Vec source_profile(const CohomMetric& h, const SourceProfile& s, double p) {
  if (!(s.amplitude > 0.0) || !(s.width > 0.0)) throw ConfigError("source_profile: amplitude and width must be positive");
  const double tail = s.tail_exponent > 0.0 ? s.tail_exponent : 2.0 + 4.0 / p + 0.1;
  // Profiles in rho^2 = sqrt(r^4 + eps^4) so they are smooth across the bolt.
  const Vec rho2 = smooth_radius_sq(h);
  const double c2 = s.center * s.center;
  const Vec bump = (-((rho2 - c2) / (2.0 * s.center * s.width)).square()).exp();
  return s.amplitude * (bump + (1.0 + rho2).pow(-0.5 * tail));
}

ConformalFamily conformal_psc_sequence(const CohomMetric& h_hat, double p, int count, const SourceProfile& profile) {
  if (!(p > 2.0)) throw DomainError("conformal_psc_sequence: p must exceed n/(n-2) = 2");
  if (count < 1) throw ConfigError("conformal_psc_sequence: count must be positive");
  ConformalFamily fam;
  fam.base = h_hat;
  fam.p = p;
  const Vec f = source_profile(h_hat, profile, p);
  const Vec u1 = solve_poisson(h_hat, f / 3.0);
  const Eigen::Index interior = h_hat.size() - 1;
  for (int i = 1; i <= count; ++i) {
    const double a = std::ldexp(1.0, -(i - 1));
    double s = 1.0;
    Vec u, sc;
    for (int tries = 0;; ++tries) {
      u = (a * s) * u1;
      if ((1.0 + u).minCoeff() > 0.0) {
        sc = conformal_scal(h_hat, u);
        if (sc.head(interior).minCoeff() > 0.0) break;
      }
      if (tries >= 60) throw NumericError("conformal_psc_sequence: positivity unreachable");
      s *= 0.5;
    }
    fam.sources.push_back(a * s * f);
    fam.factors.push_back(u);
    fam.shrink.push_back(s);
    fam.metrics.push_back(conformal_metric(h_hat, u));
    fam.min_scal.push_back(sc.head(interior).minCoeff());
    // |g - h|_h = 2|u| pointwise.
    const Vec pw = 2.0 * u.abs();
    fam.norm_lp.push_back(lp_of_pointwise(pw, p, h_hat));
    fam.norm_inf.push_back(pw.maxCoeff());
  }
  return fam;
}

Vec super_heat_defect(const CohomMetric& g, const CohomMetric& gn, const CohomMetric& h, double dt) {
  const InvariantTensor ric = ricci_tensor(g);
  const Vec sc = ric.frame.rowwise().sum();
  const Vec scn = scalar_curvature(gn);
  const RadialVector V = deturck_field(g, h);
  const Vec transport = V.comp * derivative(sc, 1, *g.grid, Parity::Even);
  const Vec rhs = laplace_beltrami(g, sc) + 2.0 * ric.frame.square().rowwise().sum() + transport;
  return (scn - sc) / dt - rhs;
}

PositivityReport scal_positivity_run(const CohomMetric& g0, const CohomMetric& h, const PositivityOptions& o) {
  if (!(o.t_end > 0.0) || !(o.dt > 0.0)) throw ConfigError("scal_positivity_run: bad time parameters");
  PositivityReport rep;
  const Eigen::Index keep = g0.size() - o.skip_outer;
  // Positivity is read against the discrete background, whose own scal is truncation error.
  const Vec floor = scalar_curvature(h);
  const Vec s0 = scalar_curvature(g0);
  rep.initial_min_scal = (s0 - floor).head(keep).minCoeff();
  rep.precondition = rep.initial_min_scal >= -o.tolerance;
  rep.min_scal = rep.initial_min_scal;
  if (!rep.precondition) return rep;

  auto l2 = [&](Vec v) {
    v.tail(o.skip_outer).setZero();
    return lp_of_pointwise(v.abs(), 2.0, h);
  };
  const int steps = std::max(1, static_cast<int>(std::lround(o.t_end / o.dt)));
  const double dt = o.t_end / steps;
  const double probe = 1e-3 * dt;
  CohomMetric g = g0;
  Vec s_prev = s0, rate_prev;
  for (int n = 0; n < steps; ++n) {
    const CohomMetric gn = rdt_step(g, h, dt);
    const Vec s_next = scalar_curvature(gn);
    const double d = l2(super_heat_defect(g, gn, h, dt));
    // Spatial floor: the same defect along a vanishing step.
    double b = l2(super_heat_defect(g, rdt_step(g, h, probe), h, probe));
    const Vec rate = (s_next - s_prev) / dt;
    if (rate_prev.size() == rate.size()) b += l2(rate - rate_prev);
    rep.times.push_back((n + 1) * dt);
    rep.defects.push_back(d);
    rep.budgets.push_back(b);
    rep.mins.push_back((s_next - floor).head(keep).minCoeff());
    rep.min_scal = std::min(rep.min_scal, rep.mins.back());
    rep.max_defect = std::max(rep.max_defect, d);
    rep.max_budget = std::max(rep.max_budget, b);
    if (b > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, d / b);
    rate_prev = rate;
    s_prev = s_next;
    g = gn;
  }
  return rep;
}

RigidityReport rigidity_experiment(const CohomMetric& h_hat, const CohomMetric& g0, double p, const RigidityOptions& o) {
  if (!(p > 1.0)) throw DomainError("rigidity_experiment: need p > 1");
  if (p == 2.0) throw DomainError("rigidity_experiment: p = n/(n-2) is the open borderline case");
  const Vec floor = scalar_curvature(h_hat);
  const Vec s0 = scalar_curvature(g0) - floor;
  if (s0.head(g0.size() - 4).minCoeff() < -1e-6)
    throw DomainError("rigidity_experiment: initial scalar curvature is negative somewhere");

  RigidityReport rep;
  rep.p = p;
  rep.predicted_upper = -4.0 / (2.0 * p) - 1.0;
  rep.heat_floor = -2.0;
  Eigen::Index x0 = 0;
  (h_hat.nodes() - o.track_u).abs().minCoeff(&x0);

  FlowOptions fo;
  fo.dt.dt0 = o.dt0;
  fo.dt.growth = o.growth;
  fo.dt.dt_max = o.dt_max;
  fo.t_end = o.t_end;
  fo.record_residual = false;
  for (double t = o.fit_lo; t < o.fit_hi * (1.0 + 1e-12); t *= std::pow(10.0, 0.1)) fo.snapshot_times.push_back(t);
  if (fo.snapshot_times.back() > o.t_end) fo.snapshot_times.back() = o.t_end;
  const Trajectory tr = run_fixed_gauge(g0, h_hat, fo);
  for (const auto& s : tr.snapshots) {
    const Vec sc = scalar_curvature(s.g) - floor;
    if (sc.head(sc.size() - 4).minCoeff() < -1e-6) rep.positivity = false;
    if (s.t >= o.fit_lo * (1.0 - 1e-12) && s.t <= o.fit_hi * (1.0 + 1e-12)) rep.samples.emplace_back(s.t, sc[x0]);
  }
  const RateFit fit = fit_power_law(rep.samples, false, 1e-14);
  rep.fit_degenerate = fit.degenerate;
  rep.fitted = fit.exponent;
  if (fit.degenerate)
    rep.follows = "none";
  else
    rep.follows = std::abs(fit.exponent - rep.predicted_upper) <= std::abs(fit.exponent - rep.heat_floor) ? "upper"
                                                                                                          : "heat_floor";
  return rep;
}

}  // namespace alelab
