#include "alelab/gauge.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cfloat>
#include <cmath>
#include <mutex>
#include <sstream>

#include "alelab/errors.hpp"
#include "alelab/norms.hpp"

namespace alelab {

namespace {

double l2_norm(const InvariantTensor& k, const CohomMetric& h) { return std::sqrt(l2_inner(k, k, h)); }

// Solve DV(L_X h) = rhs for X with X(0) = 0 and X' = 0 at r_max. The map is banded
// (width 3 around the bolt), so its columns are probed seven at a time.
RadialVector solve_gauge_correction(const CohomMetric& h, const Vec& rhs) {
  const Eigen::Index n = h.size();
  const int colors = 7;
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trips;
  for (int c = 0; c < colors; ++c) {
    RadialVector probe{Vec::Zero(n)};
    for (Eigen::Index q = 1; q < n; ++q)
      if (q % colors == c) probe.comp[q] = 1.0;
    const Vec resp = deturck_linear(h, lie_derivative(probe, h)).comp;
    for (Eigen::Index p = 1; p + 1 < n; ++p) {
      for (Eigen::Index q = std::max<Eigen::Index>(1, p - 3); q <= std::min(n - 1, p + 3); ++q)
        if (q % colors == c && resp[p] != 0.0) trips.emplace_back(p - 1, q - 1, resp[p]);
    }
  }
  trips.emplace_back(n - 2, n - 2, 1.0);
  trips.emplace_back(n - 2, n - 3, -1.0);
  Eigen::SparseMatrix<double> J(n - 1, n - 1);
  J.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n - 1);
  for (Eigen::Index p = 1; p + 1 < n; ++p) b[p - 1] = rhs[p];
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw KernelConstructionError("kernel_basis: gauge system is singular");
  const Eigen::VectorXd x = lu.solve(b);
  RadialVector X{Vec::Zero(n)};
  X.comp.tail(n - 1) = x.array();
  return X;
}

double w22_norm(const InvariantTensor& e, const CohomMetric& h) {
  NormSpec spec;
  spec.kind = NormKind::Wkp;
  spec.k = 2;
  spec.p = 2.0;
  return norm(e, spec, h);
}

}  // namespace

KernelBasis kernel_basis(double eps, GridPtr grid, double tol) {
  if (!(eps > 0.0)) throw DomainError("kernel_basis: eps must be positive");
  struct Entry {
    std::weak_ptr<const RadialGrid> grid;
    double eps, tol;
    KernelBasis basis;
  };
  static std::mutex mu;
  static std::vector<Entry> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    for (const auto& e : cache)
      if (e.eps == eps && e.tol == tol && e.grid.lock() == grid) return e.basis;
  }

  const CohomMetric h = eguchi_hanson(eps, grid);
  const double d = 1e-4 * eps;
  const InvariantTensor raw =
      (0.5 / d) * (difference(eh_family(eps + d, eps, grid), h) - difference(eh_family(eps - d, eps, grid), h));
  const Vec rhs = -deturck_linear(h, raw).comp;
  const RadialVector X = solve_gauge_correction(h, rhs);
  InvariantTensor e = raw + lie_derivative(X, h);
  e = (1.0 / l2_norm(e, h)) * e;
  if (l2_inner(e, raw, h) < 0.0) e = -1.0 * e;

  KernelBasis basis;
  basis.base_eps = eps;
  basis.residual = l2_norm(lichnerowicz(h, e), h) / w22_norm(e, h);
  basis.elements.push_back(e);
  if (!(basis.residual <= tol)) {
    std::ostringstream os;
    os << "kernel_basis: residual " << basis.residual << " exceeds " << tol;
    throw KernelConstructionError(os.str());
  }
  std::lock_guard<std::mutex> lock(mu);
  std::erase_if(cache, [](const Entry& x) { return x.grid.expired(); });
  cache.push_back({grid, eps, tol, basis});
  return basis;
}

InvariantTensor kernel_element(const CohomMetric& h) {
  InvariantTensor e = eh_family_tangent(h);
  return (1.0 / l2_norm(e, h)) * e;
}

KernelBasis kernel_basis_of(const CohomMetric& h) {
  KernelBasis b;
  b.base_eps = h.eps;
  b.elements.push_back(kernel_element(h));
  return b;
}

InvariantTensor project(const CohomMetric& h, const KernelBasis& basis, const InvariantTensor& k, Projection mode) {
  require_frame(k, h, "project");
  InvariantTensor par = InvariantTensor::zero(h.size(), h.label);
  for (const auto& e : basis.elements) {
    require_frame(e, h, "project");
    par = par + l2_inner(k, e, h) * e;
  }
  return mode == Projection::Parallel ? par : k - par;
}

InvariantTensor transfer(const CohomMetric& h, const CohomMetric& h_bar, const KernelBasis& basis_hbar,
                         const InvariantTensor& k) {
  return project(h_bar, basis_hbar, reframe(k, h, h_bar), Projection::Perp);
}

InvariantTensor transfer_inverse(const CohomMetric& h, const CohomMetric& h_bar, const KernelBasis& basis_h,
                                 const KernelBasis& basis_hbar, const InvariantTensor& k_bar) {
  require_frame(k_bar, h_bar, "transfer_inverse");
  const std::size_t m = basis_h.elements.size();
  if (basis_hbar.elements.size() != m) throw ContractViolation("transfer_inverse: kernel dimensions differ");
  std::vector<InvariantTensor> ebar;
  for (const auto& e : basis_hbar.elements) ebar.push_back(reframe(e, h_bar, h));
  const InvariantTensor k = reframe(k_bar, h_bar, h);
  // Pi_par_{hbar,h} in the bases: M(i,j) = <ebar_j, e_i>_h.
  Eigen::MatrixXd M(m, m);
  Eigen::VectorXd c(m);
  for (std::size_t i = 0; i < m; ++i) {
    c[i] = l2_inner(k, basis_h.elements[i], h);
    for (std::size_t j = 0; j < m; ++j) M(i, j) = l2_inner(ebar[j], basis_h.elements[i], h);
  }
  const double det = M.determinant();
  if (!(std::abs(det) > 1e-8)) throw GaugeDistanceError("transfer_inverse: kernels are too far apart");
  const Eigen::VectorXd d = M.partialPivLu().solve(c);
  InvariantTensor out = k;
  for (std::size_t j = 0; j < m; ++j) out = out - d[j] * ebar[j];
  return out;
}

InvariantTensor transfer_inverse_direct(const CohomMetric& h, const CohomMetric& h_bar, const InvariantTensor& e,
                                        const InvariantTensor& e_bar, const InvariantTensor& k_bar) {
  const InvariantTensor eb = reframe(e_bar, h_bar, h), k = reframe(k_bar, h_bar, h);
  const double denom = l2_inner(eb, e, h);
  if (!(std::abs(denom) > 1e-8)) throw GaugeDistanceError("transfer_inverse_direct: kernels are too far apart");
  return k - (l2_inner(k, e, h) / denom) * eb;
}

double projection_residual(const CohomMetric& g, double eps) {
  const CohomMetric h = eh_family(eps, g.chart_eps, g.grid);
  return l2_inner(difference(g, h), kernel_element(h), h);
}

namespace {

double refine_root(const CohomMetric& g, double a, double b, double fa, double fb) {
  // bisection to a short bracket, then secant steps kept inside it
  for (int it = 0; it < 200 && b - a > 1e-6 * b; ++it) {
    const double m = 0.5 * (a + b), fm = projection_residual(g, m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  double x0 = a, f0 = fa, x1 = b, f1 = fb;
  for (int it = 0; it < 60; ++it) {
    if (f1 == f0) break;
    double x = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    const double fx = projection_residual(g, x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (fa < 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    x0 = x1;
    f0 = f1;
    x1 = x;
    f1 = fx;
    if (std::abs(x1 - x0) <= 4.0 * DBL_EPSILON * x1) return x1;
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

}  // namespace

ProjectionResult moduli_projection(const CohomMetric& g, const ProjectionOptions& options) {
  if (!(g.chart_eps > 0.0)) throw ProjectionDomainError("moduli_projection: metric is not in an EH chart");
  const double eps0 = g.eps > 0.0 ? g.eps : g.chart_eps;
  double lo = options.lo > 0.0 ? options.lo : 0.5 * eps0;
  double hi = options.hi > 0.0 ? options.hi : 2.0 * eps0;
  const int m = std::max(3, options.scan_points);
  std::vector<double> xs(m), fs(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (m - 1));
    fs[i] = projection_residual(g, xs[i]);
  }
  // Roots at scan points (or in between) are collected once each.
  std::vector<std::pair<int, int>> brackets;
  std::vector<double> exact;
  for (int i = 0; i < m; ++i) {
    if (fs[i] == 0.0) {
      exact.push_back(xs[i]);
      continue;
    }
    if (i + 1 < m && fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0)) brackets.emplace_back(i, i + 1);
  }
  const std::size_t count = brackets.size() + exact.size();
  if (count == 0) throw ProjectionDomainError("moduli_projection: no root of F in the bracket");
  if (count > 1) {
    std::ostringstream os;
    os << "moduli_projection: " << count << " roots near eps =";
    for (auto [i, j] : brackets) os << ' ' << 0.5 * (xs[i] + xs[j]);
    for (double x : exact) os << ' ' << x;
    throw ProjectionAmbiguityError(os.str());
  }
  const double eps = exact.empty() ? refine_root(g, xs[brackets[0].first], xs[brackets[0].second],
                                                 fs[brackets[0].first], fs[brackets[0].second])
                                   : exact[0];

  ProjectionResult res;
  res.point.h = eh_family(eps, g.chart_eps, g.grid);
  res.point.eps = eps;
  res.k = difference(g, res.point.h);
  const InvariantTensor e = kernel_element(res.point.h);
  const double kn = l2_norm(res.k, res.point.h);
  res.orthogonality = kn > 0.0 ? std::abs(l2_inner(res.k, e, res.point.h)) / kn : 0.0;
  if (res.k.frame.abs().maxCoeff() > options.max_distance)
    throw ProjectionDomainError("moduli_projection: metric is too far from the family");
  return res;
}

double moduli_eps_derivative(const CohomMetric& g, const ModuliPoint& at, const InvariantTensor& X) {
  require_frame(X, at.h, "moduli_eps_derivative");
  const double d = 1e-5 * at.eps;
  const double dF = (projection_residual(g, at.eps + d) - projection_residual(g, at.eps - d)) / (2.0 * d);
  if (!(std::abs(dF) > 0.0)) throw NumericError("moduli_eps_derivative: F is flat at the root");
  return -l2_inner(X, kernel_element(at.h), at.h) / dF;
}

InvariantTensor moduli_derivative(const CohomMetric& g, const ModuliPoint& at, const InvariantTensor& X) {
  return moduli_eps_derivative(g, at, X) * eh_family_tangent(at.h);
}

}  // namespace alelab
