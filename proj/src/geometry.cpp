#include "alelab/geometry.hpp"

#include <atomic>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>

#include "alelab/errors.hpp"

namespace alelab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string eh_label(double eps, double chart) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "eh(eps=%.17g,chart=%.17g)", eps, chart);
  return buf;
}

// w = r^2 along the geodesic coordinate of EH_eps: dw/du = 2 (w^2 + eps^4)^{1/4}.
Vec eh_w_of_u(double eps, const RadialGrid& grid) {
  namespace ode = boost::numeric::odeint;
  const double e4 = std::pow(eps, 4);
  auto rhs = [e4](const double& w, double& dw, double) { dw = 2.0 * std::pow(w * w + e4, 0.25); };
  std::vector<double> times(grid.nodes.data(), grid.nodes.data() + grid.size());
  Vec w(grid.size());
  double state = 0.0;
  Eigen::Index k = 0;
  auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<double>());
  ode::integrate_times(stepper, rhs, state, times.begin(), times.end(), grid.min_gap() * 0.5,
                       [&](const double& x, double) { w[k++] = x; });
  return w;
}

// Chart coordinates are reused by every family member presented in that chart.
Vec cached_w_of_u(double eps, const GridPtr& grid) {
  struct Entry {
    std::weak_ptr<const RadialGrid> grid;
    double eps;
    Vec w;
  };
  static std::mutex mu;
  static std::vector<Entry> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    for (const auto& e : cache)
      if (e.eps == eps && e.grid.lock() == grid) return e.w;
  }
  Vec w = eh_w_of_u(eps, *grid);
  std::lock_guard<std::mutex> lock(mu);
  std::erase_if(cache, [](const Entry& e) { return e.grid.expired(); });
  if (cache.size() > 64) cache.erase(cache.begin());
  cache.push_back({grid, eps, w});
  return w;
}

double extrapolate_even(const Vec& f, const RadialGrid& grid) {
  return bolt_value(f, grid, Parity::Even);
}

}  // namespace

InvariantTensor InvariantTensor::zero(Eigen::Index n, std::string ref) {
  return {Eigen::ArrayX4d::Zero(n, 4), std::move(ref)};
}

static void same_frame(const InvariantTensor& a, const InvariantTensor& b) {
  if (a.reference != b.reference)
    throw ContractViolation("tensor frames differ: " + a.reference + " vs " + b.reference);
  if (a.size() != b.size()) throw ContractViolation("tensor sizes differ");
}

InvariantTensor operator+(const InvariantTensor& a, const InvariantTensor& b) {
  same_frame(a, b);
  return {a.frame + b.frame, a.reference};
}

InvariantTensor operator-(const InvariantTensor& a, const InvariantTensor& b) {
  same_frame(a, b);
  return {a.frame - b.frame, a.reference};
}

InvariantTensor operator*(double s, const InvariantTensor& a) { return {s * a.frame, a.reference}; }

void require_frame(const InvariantTensor& k, const CohomMetric& m, const char* where) {
  if (k.reference != m.label)
    throw ContractViolation(std::string(where) + ": tensor is in frame " + k.reference +
                            ", expected " + m.label);
  if (k.size() != m.size()) throw ContractViolation(std::string(where) + ": size mismatch");
}

std::string fresh_label(const std::string& base) {
  static std::atomic<unsigned long> counter{0};
  return base + "#" + std::to_string(++counter);
}

std::array<double, 4> eh_coefficients_at_r(double eps, double r) {
  if (!(eps > 0.0)) throw DomainError("eh_coefficients_at_r: eps must be positive");
  const double q = std::sqrt(std::pow(r, 4) + std::pow(eps, 4));
  const double a = r * r / q;
  return {a, a * r * r, q, q};
}

CohomMetric eh_family(double eps, double chart_eps, GridPtr grid) {
  if (!(eps > 0.0) || !(chart_eps > 0.0)) throw DomainError("eh_family: eps must be positive");
  const Vec w = cached_w_of_u(chart_eps, grid);
  const double e4 = std::pow(eps, 4), c4 = std::pow(chart_eps, 4);
  CohomMetric g;
  g.grid = grid;
  g.comps.resize(grid->size(), 4);
  const Vec q = (w.square() + e4).sqrt();
  g.comps.col(0) = ((w.square() + c4) / (w.square() + e4)).sqrt();
  g.comps.col(1) = w.square() / q;
  g.comps.col(2) = q;
  g.comps.col(3) = q;
  g.comps(0, 1) = 0.0;
  g.r = w.sqrt();
  g.eps = eps;
  g.chart_eps = chart_eps;
  g.group_order = 2;
  g.label = eh_label(eps, chart_eps);
  return g;
}

CohomMetric eguchi_hanson(double eps, GridPtr grid) {
  if (!(eps > 0.0)) throw DomainError("eguchi_hanson: eps must be positive");
  return eh_family(eps, eps, std::move(grid));
}

CohomMetric flat_metric(GridPtr grid) {
  CohomMetric g;
  const Vec& u = grid->nodes;
  g.grid = grid;
  g.comps.resize(grid->size(), 4);
  g.comps.col(0) = 1.0;
  for (int i = 1; i < 4; ++i) g.comps.col(i) = u.square();
  g.r = u;
  g.eps = 0.0;
  g.chart_eps = 0.0;
  g.group_order = 2;
  g.label = "flat";
  return g;
}

InvariantTensor eh_family_tangent(const CohomMetric& h) {
  if (!(h.eps > 0.0)) throw DomainError("eh_family_tangent: not an EH family member");
  const Vec w2 = h.r.square().square();
  const double e3 = std::pow(h.eps, 3), e4 = std::pow(h.eps, 4);
  const Vec f = 2.0 * e3 / (w2 + e4);
  InvariantTensor t = InvariantTensor::zero(h.size(), h.label);
  t.frame.col(0) = -f;
  t.frame.col(1) = -f;
  t.frame.col(2) = f;
  t.frame.col(3) = f;
  return t;
}

FrameGeometry frame_geometry(const CohomMetric& g) {
  const RadialGrid& grid = *g.grid;
  const Eigen::Index n = g.size();
  const Vec& u = grid.nodes;
  if ((g.comps.col(0) <= 0.0).any()) throw DomainError("frame_geometry: non-positive du^2 coefficient");
  for (int i = 1; i < 4; ++i)
    if ((g.comps.col(i).tail(n - 1) <= 0.0).any())
      throw DomainError("frame_geometry: non-positive sphere coefficient");

  FrameGeometry fg;
  fg.A = g.comps.col(0);
  const Vec lnA = fg.A.log();
  fg.dlnA = derivative(lnA, 1, grid, Parity::Even);
  fg.ell.resize(n, 3);
  fg.s.resize(n, 3);
  fg.D.resize(n, 3);
  fg.K.assign(n, Eigen::Matrix4d::Zero());

  // Q_i = 2 ell_i' + ell_i^2, with the 1/u^2 poles of collapsing directions cancelled.
  Eigen::ArrayX3d Q(n, 3);
  for (int i = 0; i < 3; ++i) {
    const Vec B = g.comps.col(i + 1);
    if (g.collapses(i + 1)) {
      Vec beta(n);
      beta.tail(n - 1) = B.tail(n - 1) / u.tail(n - 1).square();
      beta[0] = extrapolate_even(beta, grid);
      const Vec lam = derivative(beta.log(), 1, grid, Parity::Even);
      const Vec dlam = derivative(lam, 1, grid, Parity::Odd);
      fg.ell.col(i).tail(n - 1) = 2.0 / u.tail(n - 1) + lam.tail(n - 1);
      Q.col(i).tail(n - 1) = 2.0 * dlam.tail(n - 1) + 4.0 * lam.tail(n - 1) / u.tail(n - 1) +
                             lam.tail(n - 1).square();
      fg.ell(0, i) = 0.0;
      Q(0, i) = 0.0;
    } else {
      const Vec l = derivative(B.log(), 1, grid, Parity::Even);
      const Vec dl = derivative(l, 1, grid, Parity::Odd);
      fg.ell.col(i) = l;
      Q.col(i) = 2.0 * dl + l.square();
    }
  }
  const Vec N = fg.A.sqrt();
  for (int i = 0; i < 3; ++i) fg.s.col(i) = fg.ell.col(i) / (2.0 * N);

  for (Eigen::Index p = 1; p < n; ++p) {
    const double B[3] = {g.comps(p, 1), g.comps(p, 2), g.comps(p, 3)};
    const double P = std::sqrt(B[0] * B[1] * B[2]);
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      fg.D(p, i) = (B[j] + B[k] - B[i]) / P;
    }
    Eigen::Matrix4d& K = fg.K[p];
    for (int i = 0; i < 3; ++i) {
      const double k0 = -(Q(p, i) - fg.ell(p, i) * fg.dlnA[p]) / (4.0 * fg.A[p]);
      K(0, i + 1) = K(i + 1, 0) = k0;
    }
    const double B123 = B[0] * B[1] * B[2];
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const int k = 3 - i - j;
        const double orb = ((B[i] - B[j]) * (B[i] - B[j]) - 3.0 * B[k] * B[k] +
                            2.0 * B[k] * (B[i] + B[j])) / B123;
        K(i + 1, j + 1) = K(j + 1, i + 1) = orb - fg.s(p, i) * fg.s(p, j);
      }
  }
  // Bolt row by even extrapolation of each entry.
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double a1 = u[1] * u[1], a2 = u[2] * u[2];
      fg.K[0](a, b) = (a2 * fg.K[1](a, b) - a1 * fg.K[2](a, b)) / (a2 - a1);
    }
  for (int i = 0; i < 3; ++i) {
    Vec d = fg.D.col(i);
    if (g.collapses(i + 1)) {
      // D_i of the collapsing direction has a 1/u pole; only products with O(u^2) factors are used.
      d[0] = 0.0;
    } else {
      d[0] = extrapolate_even(d, grid);
    }
    fg.D.col(i) = d;
  }
  return fg;
}

InvariantTensor ricci_tensor(const CohomMetric& g, const FrameGeometry& fg) {
  const Eigen::Index n = g.size();
  InvariantTensor ric = InvariantTensor::zero(n, g.label);
  for (Eigen::Index p = 0; p < n; ++p)
    for (int a = 0; a < 4; ++a) ric.frame(p, a) = fg.K[p].row(a).sum() - fg.K[p](a, a);
  return ric;
}

InvariantTensor ricci_tensor(const CohomMetric& g) { return ricci_tensor(g, frame_geometry(g)); }

Vec scalar_curvature(const CohomMetric& g) { return ricci_tensor(g).frame.rowwise().sum(); }

InvariantTensor riemann_action(const CohomMetric& g, const InvariantTensor& k) {
  require_frame(k, g, "riemann_action");
  const FrameGeometry fg = frame_geometry(g);
  InvariantTensor out = InvariantTensor::zero(g.size(), g.label);
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    Eigen::Matrix4d K = fg.K[p];
    K.diagonal().setZero();
    out.frame.row(p) = (K * k.frame.row(p).matrix().transpose()).transpose().array();
  }
  return out;
}

Vec smooth_radius_sq(const CohomMetric& g) {
  const double e2 = g.eps * g.eps;
  return (g.r.pow(4) + e2 * e2).sqrt();
}

Vec volume_density(const CohomMetric& g) {
  return (2.0 * kPi * kPi / g.group_order) * g.comps.rowwise().prod().sqrt();
}

double l2_inner(const InvariantTensor& a, const InvariantTensor& b, const CohomMetric& g) {
  require_frame(a, g, "l2_inner");
  require_frame(b, g, "l2_inner");
  const Vec pt = (a.frame * b.frame).rowwise().sum();
  return integrate(pt, volume_density(g), *g.grid);
}

InvariantTensor difference(const CohomMetric& g, const CohomMetric& h) {
  if (g.size() != h.size())
    throw ContractViolation("difference: metrics live on different grids");
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  k.frame.col(0) = g.comps.col(0) / h.comps.col(0) - 1.0;
  for (int i = 1; i < 4; ++i) {
    Vec ratio = Vec::Zero(h.size());
    ratio.tail(h.size() - 1) = g.comps.col(i).tail(h.size() - 1) / h.comps.col(i).tail(h.size() - 1) - 1.0;
    if (h.comps(0, i) > 0.0)
      ratio[0] = g.comps(0, i) / h.comps(0, i) - 1.0;
    else
      ratio[0] = extrapolate_even(ratio, *h.grid);
    k.frame.col(i) = ratio;
  }
  return k;
}

CohomMetric perturb(const CohomMetric& h, const InvariantTensor& k) {
  require_frame(k, h, "perturb");
  CohomMetric g = h;
  g.comps = h.comps * (1.0 + k.frame);
  g.label = fresh_label(h.label + "+k");
  return g;
}

InvariantTensor reframe(const InvariantTensor& k, const CohomMetric& from, const CohomMetric& to) {
  require_frame(k, from, "reframe");
  if (from.label == to.label) return k;
  InvariantTensor out = InvariantTensor::zero(to.size(), to.label);
  for (int i = 0; i < 4; ++i) {
    Vec ratio(to.size());
    ratio.tail(to.size() - 1) = from.comps.col(i).tail(to.size() - 1) / to.comps.col(i).tail(to.size() - 1);
    ratio[0] = (to.comps(0, i) > 0.0) ? from.comps(0, i) / to.comps(0, i)
                                       : extrapolate_even(ratio, *to.grid);
    out.frame.col(i) = k.frame.col(i) * ratio;
  }
  return out;
}

Eigen::ArrayX4d asymptotic_deviation(const CohomMetric& g) {
  const RadialGrid& grid = *g.grid;
  const Vec drdu = derivative(g.r, 1, grid, Parity::Even);
  Eigen::ArrayX4d dev(g.size(), 4);
  dev.col(0) = g.comps.col(0) / drdu.square() - 1.0;
  for (int i = 1; i < 4; ++i) dev.col(i) = g.comps.col(i) / g.r.square() - 1.0;
  dev.row(0).setZero();
  return dev;
}

RateFit ale_order_fit(const CohomMetric& g, double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || r_hi > g.r[g.size() - 1])
    throw DomainError("ale_order_fit: window outside grid");
  const Eigen::ArrayX4d dev = asymptotic_deviation(g);
  std::vector<std::pair<double, double>> samples;
  for (Eigen::Index p = 1; p < g.size(); ++p)
    if (g.r[p] >= r_lo && g.r[p] <= r_hi)
      samples.emplace_back(g.r[p], std::sqrt(dev.row(p).square().sum()));
  RateFit fit = fit_power_law(samples, false, 1e-14);
  fit.exponent = -fit.exponent;  // report tau with |g - g_flat| ~ r^{-tau}
  return fit;
}

double adm_mass(const CohomMetric& g, double radius) {
  const RadialGrid& grid = *g.grid;
  const Eigen::Index n = g.size();
  if (!(radius > g.r[1]) || radius > g.r[n - 1]) throw DomainError("adm_mass: radius outside grid");
  const Eigen::ArrayX4d dev = asymptotic_deviation(g);
  const Vec drdu = derivative(g.r, 1, grid, Parity::Even);
  Vec integrand = Vec::Zero(n);
  for (int i = 1; i < 4; ++i) {
    const Vec d = derivative(Vec(dev.col(i)), 1, grid, Parity::Even) / drdu;
    integrand -= d + (dev.col(i) - dev.col(0)) / g.r;
  }
  integrand[0] = integrand[1];
  // locate u with r(u) = radius
  double lo = 0.0, hi = grid.r_max;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (interpolate(grid, g.r, mid) < radius ? lo : hi) = mid;
  }
  const double uR = 0.5 * (lo + hi);
  const double area = 2.0 * kPi * kPi / g.group_order * std::pow(radius, 3);
  return area * interpolate(grid, integrand, uR);
}

void write_geometry_csv(const CohomMetric& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "u,r,comp_rr,comp_11,comp_22,comp_33\n" << std::setprecision(17);
  for (Eigen::Index p = 0; p < g.size(); ++p)
    out << g.nodes()[p] << ',' << g.r[p] << ',' << g.comps(p, 0) << ',' << g.comps(p, 1) << ','
        << g.comps(p, 2) << ',' << g.comps(p, 3) << '\n';
}

}  // namespace alelab
