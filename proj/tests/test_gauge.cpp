#include <cmath>
#include <random>

#include "alelab/errors.hpp"
#include "alelab/gauge.hpp"
#include "alelab/norms.hpp"
#include "doctest.h"

using namespace alelab;

namespace {

GridPtr gauge_grid() {
  static GridPtr g = make_grid(60.0, 1500, 1.003);
  return g;
}

InvariantTensor smooth_tensor(const CohomMetric& h, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Vec& u = h.nodes();
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  const double b = U(rng);
  for (int a = 0; a < 4; ++a) {
    const double c = 1.5 + 2.0 * (U(rng) + 1.0);
    k.frame.col(a) = U(rng) * (1.0 - (-u.square()).exp()) * (-(u - c).square()).exp() +
                     (a < 2 ? b : U(rng)) * (-u.square()).exp();
  }
  return k;
}

double l2(const InvariantTensor& k, const CohomMetric& h) { return std::sqrt(l2_inner(k, k, h)); }

}  // namespace

TEST_CASE("constructed kernel element is a kernel element") {
  const KernelBasis b = kernel_basis(1.0, gauge_grid());
  REQUIRE(b.elements.size() == 1);
  const CohomMetric h = eguchi_hanson(1.0, gauge_grid());
  const InvariantTensor& e = b.elements[0];
  CHECK(l2_inner(e, e, h) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(b.residual <= 1e-3);
  // Agrees with the TT representative of the family tangent, which is closed form.
  const InvariantTensor tt = kernel_element(h);
  CHECK(l2(e - tt, h) < 1e-3);
  CHECK(l2_inner(e, eh_family_tangent(h), h) > 0.0);
}

TEST_CASE("kernel element decays like r^-4") {
  const CohomMetric h = eguchi_hanson(1.0, gauge_grid());
  const InvariantTensor e = kernel_basis(1.0, gauge_grid()).elements[0];
  std::vector<std::pair<double, double>> s;
  for (Eigen::Index p = 0; p < h.size(); ++p)
    if (h.r[p] >= 10.0 && h.r[p] <= 30.0) s.emplace_back(h.r[p], std::sqrt(e.frame.row(p).square().sum()));
  CHECK(fit_power_law(s, false).exponent == doctest::Approx(-4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("kernel basis scales with the family") {
  auto g1 = make_grid(30.0, 1500, 1.003);
  auto g2 = make_grid(60.0, 1500, 1.003);
  const CohomMetric h2 = eguchi_hanson(2.0, g2);
  const InvariantTensor e1 = kernel_basis(1.0, g1).elements[0];
  const InvariantTensor e2 = kernel_basis(2.0, g2).elements[0];
  // Nodes of g2 are twice those of g1; L^2 normalisation in four dimensions rescales by 1/4.
  InvariantTensor pulled{e1.frame / 4.0, h2.label};
  const double d = std::min(l2(e2 - pulled, h2), l2(e2 + pulled, h2));
  CHECK(d <= 1e-3);
}

TEST_CASE("projections") {
  const CohomMetric h = eguchi_hanson(1.0, gauge_grid());
  const KernelBasis b = kernel_basis_of(h);
  const InvariantTensor& e = b.elements[0];
  CHECK(l2(project(h, b, e, Projection::Parallel) - e, h) < 1e-8);
  CHECK(l2(project(h, b, e, Projection::Perp), h) < 1e-8);
  std::mt19937 rng(2);
  for (int t = 0; t < 5; ++t) {
    const InvariantTensor k = smooth_tensor(h, rng);
    const InvariantTensor p = project(h, b, k, Projection::Perp);
    CHECK((project(h, b, p, Projection::Perp).frame - p.frame).abs().maxCoeff() < 1e-10);
    CHECK((project(h, b, k, Projection::Parallel) + p - k).frame.abs().maxCoeff() < 1e-14);
    CHECK(l2(project(h, b, p, Projection::Perp) - p, h) <= 1e-10 * l2(p, h));
  }
}

TEST_CASE("transfer maps") {
  auto grid = gauge_grid();
  const CohomMetric h = eh_family(1.0, 1.0, grid), hb = eh_family(1.05, 1.0, grid);
  const KernelBasis bh = kernel_basis_of(h), bb = kernel_basis_of(hb);
  std::mt19937 rng(4);
  for (int t = 0; t < 5; ++t) {
    const InvariantTensor kb = project(hb, bb, smooth_tensor(hb, rng), Projection::Perp);
    const InvariantTensor k = transfer_inverse(h, hb, bh, bb, kb);
    CHECK(std::abs(l2_inner(k, bh.elements[0], h)) < 1e-10 * l2(k, h));
    CHECK(l2(transfer(h, hb, bb, k) - kb, hb) <= 1e-8 * l2(kb, hb));
    const InvariantTensor direct = transfer_inverse_direct(h, hb, bh.elements[0], bb.elements[0], kb);
    CHECK(l2(direct - k, h) <= 1e-10 * l2(k, h));
    CHECK(l2(k, h) <= 2.0 * l2(kb, hb));
  }
  const InvariantTensor kh = project(h, bh, smooth_tensor(h, rng), Projection::Perp);
  CHECK(l2(transfer_inverse(h, h, bh, bh, kh) - kh, h) < 1e-12 * l2(kh, h));
}

TEST_CASE("moduli projection fixes the family and certifies orthogonality") {
  auto grid = gauge_grid();
  const CohomMetric h = eguchi_hanson(1.0, grid);
  const auto fixed = moduli_projection(h);
  CHECK(std::abs(fixed.point.eps - 1.0) < 1e-12);
  CHECK(fixed.k.frame.abs().maxCoeff() < 1e-8);

  const CohomMetric g = perturb(h, 0.01 * kernel_element(h));
  const auto res = moduli_projection(g);
  CHECK(res.point.eps != doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.orthogonality <= 1e-8);
  const InvariantTensor e = kernel_element(res.point.h);
  CHECK(std::abs(l2_inner(res.k, e, res.point.h)) <= 1e-8);
}

TEST_CASE("moduli projection outside the bracket") {
  auto grid = gauge_grid();
  const CohomMetric far = eh_family(5.0, 1.0, grid);
  CohomMetric g = far;
  g.eps = 1.0;
  CHECK_THROWS_AS(moduli_projection(g), ProjectionDomainError);
}

TEST_CASE("derivative of Phi vanishes on kernel-orthogonal directions") {
  auto grid = gauge_grid();
  const CohomMetric h = eguchi_hanson(1.0, grid);
  std::mt19937 rng(8);
  const CohomMetric g = perturb(h, 0.003 * smooth_tensor(h, rng));
  const auto base = moduli_projection(g);
  const KernelBasis b = kernel_basis_of(base.point.h);
  for (int t = 0; t < 5; ++t) {
    const InvariantTensor w = project(base.point.h, b, smooth_tensor(base.point.h, rng), Projection::Perp);
    CHECK(std::abs(moduli_eps_derivative(g, base.point, w)) < 1e-10);
    for (double s : {1e-3, 5e-4}) {
      const CohomMetric gs = perturb(base.point.h, base.k + s * w);
      const auto moved = moduli_projection(gs);
      CHECK(std::abs(moved.point.eps - base.point.eps) <= 1e-6 + 10.0 * s * s);
    }
  }
  // Along the kernel the derivative is the family tangent, up to the sign fixed by e.
  const InvariantTensor e = kernel_element(base.point.h);
  CHECK(moduli_eps_derivative(g, base.point, e) > 0.0);
}
