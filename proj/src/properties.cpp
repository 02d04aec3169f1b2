#include <cmath>

#include "alelab/errors.hpp"
#include "alelab/experiments.hpp"
#include "alelab/gauge.hpp"
#include "alelab/norms.hpp"
#include "alelab/psc.hpp"
#include "alelab/rates.hpp"

namespace alelab {

namespace {

using Checks = std::vector<Check>;

double l2(const InvariantTensor& k, const CohomMetric& h) { return std::sqrt(l2_inner(k, k, h)); }

Checks grid_properties() {
  // Doubling n with the stretch square-rooted refines the same graded grid.
  auto err = [](int n, double stretch) {
    const RadialGrid g = build_grid(4.0, n, stretch);
    const Vec& u = g.nodes;
    const Vec d = derivative(u.square().cos(), 1, g, Parity::Even);
    return (d + 2.0 * u * u.square().sin()).abs().maxCoeff();
  };
  const double ratio = err(201, 1.006) / err(401, std::sqrt(1.006));
  const RadialGrid g = build_grid(2.0, 200, 1.01);
  const Vec d = derivative(1.0 + g.nodes.square().cos(), 1, g, Parity::Even);
  return {check_ge("grid: derivative refinement order", std::log2(ratio), 1.9),
          check_le("grid: derivative of an even field at the bolt", std::abs(d[0]), 1e-12)};
}

Checks geometry_properties() {
  auto grid = make_grid(40.0, 800, 1.004);
  const CohomMetric h = eguchi_hanson(1.0, grid);
  CohomMetric h4 = h;
  h4.comps *= 4.0;  // 4g; frame components of Ric scale by 1/4
  const double scale = (4.0 * ricci_tensor(h4).frame - ricci_tensor(h).frame).abs().maxCoeff();
  double family = 0.0;
  for (double r : {1.3, 2.0, 5.0, 17.0}) {
    const auto a = eh_coefficients_at_r(1.0, r), b = eh_coefficients_at_r(2.0, 2.0 * r);
    family = std::max(family, std::abs(b[0] - a[0]));
    for (int i = 1; i < 4; ++i) family = std::max(family, std::abs(b[i] - 4.0 * a[i]) / b[i]);
  }
  return {check_le("geometry: Ric(4g) = Ric(g)", scale, 1e-10),
          check_le("geometry: EH_2 is the rescaled pullback of EH_1", family, 1e-8)};
}

Checks operator_properties() {
  Checks out;
  const CohomMetric h = eguchi_hanson(1.0, make_grid(40.0, 4000, 1.001));
  std::mt19937 rng(3);
  double sa = 0.0, lin = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const InvariantTensor a = random_tensor(h, rng), b = random_tensor(h, rng);
    const double x = l2_inner(lichnerowicz(h, a), b, h), y = l2_inner(a, lichnerowicz(h, b), h);
    sa = std::max(sa, std::abs(x - y) / std::abs(x));
    const InvariantTensor lhs = 2.0 * linearized_ricci(h, a) - lie_derivative(deturck_linearized(h, a), h);
    const InvariantTensor rhs = lichnerowicz(h, a);
    lin = std::max(lin, l2(lhs - rhs, h) / l2(rhs, h));
  }
  out.push_back(check_le("operators: self-adjointness of Delta_L", sa, 1e-6));
  out.push_back(check_le("operators: 2 DRic(k) - L_{DV(k)} h = Delta_L k", lin, 1e-3));

  // Semigroup property against the summed step-error estimates of both paths
  // (Richardson, second order: |X_dt - X| ~ 4/3 |X_dt - X_{dt/2}|).
  const CohomMetric hs = eguchi_hanson(1.0, make_grid(40.0, 600, 1.01));
  const InvariantTensor k = random_tensor(hs, rng);
  auto whole_split = [&](double dt) {
    DtPolicy pol;
    pol.dt0 = pol.dt_max = dt;
    return std::pair{heat_semigroup(hs, k, 1.0, pol), heat_semigroup(hs, heat_semigroup(hs, k, 0.4, pol), 0.6, pol)};
  };
  const auto [whole, split] = whole_split(0.01);
  const auto [whole2, split2] = whole_split(0.005);
  const double bound = 4.0 / 3.0 * (l2(whole - whole2, hs) + l2(split - split2, hs));
  out.push_back(check_le("operators: semigroup drift / step-error bound", l2(whole - split, hs) / bound, 1.0));

  const KernelBasis kb = kernel_basis_of(hs);
  const InvariantTensor& e = kb.elements[0];
  DtPolicy slow;
  slow.dt0 = 0.01;
  slow.growth = 1.05;
  slow.dt_max = 0.5;
  out.push_back(check_le("operators: kernel stationarity |P_10 e - e| / |e|", l2(heat_semigroup(hs, e, 10.0, slow) - e, hs), 1e-2));
  return out;
}

Checks gauge_properties() {
  Checks out;
  auto grid = make_grid(60.0, 1500, 1.003);
  const CohomMetric h = eh_family(1.0, 1.0, grid), hb = eh_family(1.05, 1.0, grid);
  const KernelBasis bh = kernel_basis_of(h), bb = kernel_basis_of(hb);
  std::mt19937 rng(4);
  double idem = 0.0, round = 0.0, direct = 0.0, dphi = 0.0;
  for (int t = 0; t < 5; ++t) {
    const InvariantTensor k = random_tensor(h, rng);
    const InvariantTensor p = project(h, bh, k, Projection::Perp);
    idem = std::max(idem, l2(project(h, bh, p, Projection::Perp) - p, h) / l2(p, h));
    const InvariantTensor kb = project(hb, bb, random_tensor(hb, rng), Projection::Perp);
    const InvariantTensor back = transfer_inverse(h, hb, bh, bb, kb);
    round = std::max(round, l2(transfer(h, hb, bb, back) - kb, hb) / l2(kb, hb));
    direct = std::max(direct, l2(transfer_inverse_direct(h, hb, bh.elements[0], bb.elements[0], kb) - back, h) / l2(back, h));
  }
  out.push_back(check_le("gauge: projector idempotence", idem, 1e-10));
  out.push_back(check_le("gauge: transfer round trip", round, 1e-8));
  out.push_back(check_le("gauge: transfer inverse vs direct formula", direct, 1e-10));

  const CohomMetric g = perturb(h, 0.003 * random_tensor(h, rng));
  const ProjectionResult base = moduli_projection(g);
  out.push_back(check_le("gauge: orthogonality certificate", base.orthogonality, 1e-8));
  const KernelBasis b = kernel_basis_of(base.point.h);
  for (int t = 0; t < 5; ++t) {
    const InvariantTensor w = project(base.point.h, b, random_tensor(base.point.h, rng), Projection::Perp);
    const double s = 1e-3;
    const ProjectionResult moved = moduli_projection(perturb(base.point.h, base.k + s * w));
    dphi = std::max(dphi, std::abs(moved.point.eps - base.point.eps) / s);
  }
  out.push_back(check_le("gauge: D Phi on ker-perp directions (difference quotient)", dphi, 1e-2));
  // Along the kernel the shift is d eps = s / |d_eps h|.
  const double s = 1e-3;
  const InvariantTensor tangent = eh_family_tangent(base.point.h);
  const double moved = moduli_projection(perturb(base.point.h, base.k + s * b.elements[0])).point.eps;
  out.push_back(check_le("gauge: D Phi along the kernel, |quotient * |d_eps h| - 1|",
                         std::abs((moved - base.point.eps) / s * l2(tangent, base.point.h) - 1.0), 1e-2));
  return out;
}

Checks norm_properties() {
  Checks out;
  auto grid = make_grid(20.0, 400, 1.005);
  const CohomMetric h = eguchi_hanson(1.0, grid);
  std::mt19937 rng(5);
  const InvariantTensor k = random_tensor(h, rng);
  const Vec pw = k.frame.square().rowwise().sum().sqrt();
  const double vol = integrate(volume_density(h), Vec::Ones(h.size()), *grid);
  double holder = -INFINITY;
  for (auto [p, r] : {std::pair{2.0, 4.0}, {1.0, 2.0}, {2.0, kInfinity}}) {
    const double lhs = lp_of_pointwise(pw, p, h);
    const double rhs = lp_of_pointwise(pw, r, h) * std::pow(vol, 1.0 / p - (std::isinf(r) ? 0.0 : 1.0 / r));
    holder = std::max(holder, lhs / rhs - 1.0);
  }
  out.push_back(check_le("norms: Hoelder on the truncated domain", holder, 1e-12));
  double scaling = 0.0;
  NormSpec specs[3];
  specs[1].kind = NormKind::Wkp;
  specs[1].k = 1;
  specs[2].kind = NormKind::WeightedWkp;
  specs[2].k = 1;
  specs[2].delta = -1.0;
  for (const NormSpec& s : specs) {
    const double a = norm(k, s, h), b = norm(2.5 * k, s, h);
    scaling = std::max(scaling, std::abs(b - 2.5 * a) / (2.5 * a));
  }
  out.push_back(check_le("norms: homogeneity", scaling, 1e-14));
  return out;
}

Checks rate_properties() {
  double sym = 0.0;
  bool bounded = true;
  for (auto [a, b] : {std::pair{2.0, 3.0}, {0.5, 1.5}, {0.3, 0.4}, {1.0, 0.7}})
    for (double t : {5.0, 50.0, 500.0}) {
      const double x = convolution_integral(a, b, t), y = convolution_integral(b, a, t);
      sym = std::max(sym, std::abs(x - y) / std::abs(x));
    }
  // Two-sided bound for delta > 1: integral * t^gamma stays in a fixed band.
  for (auto [a, b] : {std::pair{2.0, 2.0}, {0.5, 3.0}, {1.5, 1.5}}) {
    const RateClass c = convolution_rate_class(a, b);
    double lo = INFINITY, hi = 0.0;
    for (double t = 4.0; t <= 1e5; t *= 2.0) {
      const double v = convolution_integral(a, b, t) * std::pow(t, -c.exponent);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    bounded = bounded && lo > 0.0 && hi / lo < 10.0;
  }
  return {check_le("rates: symmetry in (alpha, beta)", sym, 1e-12),
          check_ge("rates: two-sided bound for delta > 1", bounded ? 1.0 : 0.0, 1.0)};
}

Checks flow_properties() {
  Checks out;
  auto grid = make_grid(40.0, 300, 1.01);
  const CohomMetric h = eguchi_hanson(1.0, grid);
  std::mt19937 rng(6);
  const CohomMetric g = perturb(h, 0.02 * random_tensor(h, rng));
  const InvariantTensor r1 = rdt_rhs(g, h, FlowForm::RdT1), r3 = rdt_rhs(g, h, FlowForm::RdT3);
  out.push_back(check_le("flow: RdT1 and RdT3 assemblies agree",
                         (r1.frame - r3.frame).abs().maxCoeff() / std::max(1.0, r1.frame.abs().maxCoeff()), 1e-9));

  FlowOptions o;
  o.dt.dt0 = o.dt.dt_max = 0.05;
  o.t_end = 2.0;
  o.snapshot_times = {0.5, 1.0, 1.5};
  double drift = 0.0;
  for (const auto& s : run_moving_gauge(h, o).snapshots)
    if (s.t > 0) drift = std::max(drift, (s.g.comps - h.comps).abs().maxCoeff() / s.t);
  out.push_back(check_le("flow: EH is stationary, |g_t - g_0| / t", drift, 1e-8));

  // Flat scalar heat: every L^p norm is non-increasing.
  const CohomMetric f = flat_metric(make_grid(20.0, 400, 1.005));
  InvariantTensor k = InvariantTensor::zero(f.size(), f.label);
  for (int a = 0; a < 4; ++a) k.frame.col(a) = (-f.nodes().square()).exp() * (1.0 + 0.5 * f.nodes().cos());
  DtPolicy pol;
  pol.dt0 = pol.dt_max = 0.02;
  pol.scheme = Scheme::ImplicitEuler;
  double growth = -INFINITY;
  for (double p : {2.0, 4.0, kInfinity}) {
    NormSpec s;
    s.p = p;
    InvariantTensor kt = k;
    double prev = norm(kt, s, f);
    for (int i = 0; i < 20; ++i) {
      kt = heat_semigroup(f, kt, 0.1, pol);
      const double now = norm(kt, s, f);
      growth = std::max(growth, now / prev - 1.0);
      prev = now;
    }
  }
  out.push_back(check_le("flow: flat heat L^p non-increase (relative growth)", growth, 1e-12));
  return out;
}

Checks psc_properties() {
  const CohomMetric h = eguchi_hanson(1.0, make_grid(100.0, 1200, 1.005));
  const Vec u = conformal_psc_sequence(h, 3.0, 1).factors[0];
  const Vec lin = -3.0 * laplace_beltrami(h, u);
  const double s = 1e-4;
  const Vec d = (scalar_curvature(conformal_metric(h, s * u)) - scalar_curvature(h)) / s;
  const Eigen::Index keep = h.size() - 4;
  const double rel = (d - lin).head(keep).abs().maxCoeff() / lin.abs().maxCoeff();
  const ConformalFamily fam = conformal_psc_sequence(eguchi_hanson(1.0, make_grid(100.0, 600, 1.01)), 3.0, 4);
  bool decreasing = true;
  for (int i = 1; i < 4; ++i)
    decreasing = decreasing && fam.norm_lp[i] < fam.norm_lp[i - 1] && fam.norm_inf[i] < fam.norm_inf[i - 1];
  return {check_le("psc: conformal linearisation 3 Lap u", rel, 1e-3),
          check_ge("psc: family norms strictly decreasing", decreasing ? 1.0 : 0.0, 1.0)};
}

}  // namespace

CriterionResult property_suite(const Config&, int jobs) {
  using Task = std::function<std::vector<CriterionResult>()>;
  std::vector<Task> tasks;
  for (Checks (*f)() : {grid_properties, geometry_properties, operator_properties, gauge_properties, norm_properties,
                        rate_properties, flow_properties, psc_properties}) {
    tasks.push_back([f] {
      CriterionResult part;
      try {
        part.checks = f();
      } catch (const std::exception& e) {
        part.checks = {Check{std::string("exception: ") + e.what(), false, 0.0, 0.0, "<=", 0.0}};
      }
      return std::vector{part};
    });
  }
  CriterionResult r{"AC10", "operator-identity suite"};
  for (auto& part : run_parallel(tasks, jobs))
    for (auto& c : part.checks) r.checks.push_back(std::move(c));
  r.finish();
  return r;
}

}  // namespace alelab
