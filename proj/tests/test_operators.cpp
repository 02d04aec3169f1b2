#include <cmath>
#include <random>

#include "alelab/errors.hpp"
#include "alelab/operators.hpp"
#include "doctest.h"

using namespace alelab;

namespace {

GridPtr eh_grid() {
  static GridPtr g = make_grid(40.0, 1500, 1.003);
  return g;
}

// Smooth, bolt-compatible (k_rr = k_11 at u = 0) random tensor.
InvariantTensor random_tensor(const CohomMetric& h, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), C(1.0, 4.0);
  const Vec& u = h.nodes();
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  const double b = U(rng);
  const Vec core = (-u.square()).exp();
  for (int a = 0; a < 4; ++a) {
    const double c = C(rng), w = 0.5 + 0.5 * (U(rng) + 1.0);
    Vec col = U(rng) * (1.0 - (-u.square()).exp()) * (-(u - c).square() / (w * w)).exp();
    col += (a < 2 ? b : U(rng)) * core;
    k.frame.col(a) = col;
  }
  return k;
}

double rel_l2(const InvariantTensor& a, const InvariantTensor& b, const CohomMetric& h) {
  const InvariantTensor d = a - b;
  return std::sqrt(l2_inner(d, d, h) / l2_inner(b, b, h));
}

}  // namespace

namespace {
double flat_laplacian_error(int n) {
  auto grid = make_grid(12.0, n, 1.0);
  const CohomMetric h = flat_metric(grid);
  const Vec& u = grid->nodes;
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  for (int a = 0; a < 4; ++a) k.frame.col(a) = (-u.square()).exp();
  const InvariantTensor lk = lichnerowicz(h, k);
  // -Delta e^{-u^2} = (8 - 4u^2) e^{-u^2} in four dimensions.
  const Vec expect = (8.0 - 4.0 * u.square()) * (-u.square()).exp();
  double err = 0.0;
  for (int a = 0; a < 4; ++a) err = std::max(err, (lk.frame.col(a) - expect).abs().maxCoeff());
  return err;
}
}  // namespace

TEST_CASE("flat Lichnerowicz acts as the scalar Laplacian on pure-trace tensors") {
  const double e1 = flat_laplacian_error(1500), e2 = flat_laplacian_error(2999);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 > 3.5);
}

TEST_CASE("Lichnerowicz annihilates the metric on EH") {
  const CohomMetric h = eguchi_hanson(1.0, eh_grid());
  InvariantTensor id{Eigen::ArrayX4d::Ones(h.size(), 4), h.label};
  CHECK(lichnerowicz(h, id).frame.abs().maxCoeff() < 1e-3);
}

TEST_CASE("frame mismatch is a contract violation") {
  const CohomMetric h = eguchi_hanson(1.0, eh_grid());
  InvariantTensor k = InvariantTensor::zero(h.size(), "other");
  CHECK_THROWS_AS(lichnerowicz(h, k), ContractViolation);
}

TEST_CASE("heat semigroup matches the Gaussian heat kernel") {
  auto grid = make_grid(20.0, 2000, 1.0);
  const CohomMetric h = flat_metric(grid);
  const Vec& u = grid->nodes;
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  for (int a = 0; a < 4; ++a) k.frame.col(a) = (-u.square()).exp();
  DtPolicy pol;
  pol.dt0 = 1e-3;
  pol.growth = 1.02;
  pol.dt_max = 0.01;
  const InvariantTensor kt = heat_semigroup(h, k, 1.0, pol);
  const Vec exact = (-u.square() / 5.0).exp() / 25.0;
  CHECK((kt.frame.col(0) - exact).abs().maxCoeff() < 1e-3);
  CHECK((kt.frame.col(2) - exact).abs().maxCoeff() < 1e-3);
  CHECK(heat_semigroup(h, k, 0.0, pol).frame.isApprox(k.frame));
}

TEST_CASE("linearisation identity on EH") {
  const CohomMetric h = eguchi_hanson(1.0, eh_grid());
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const InvariantTensor k = random_tensor(h, rng);
    const InvariantTensor lhs = 2.0 * linearized_ricci(h, k) - lie_derivative(deturck_linearized(h, k), h);
    const InvariantTensor rhs = lichnerowicz(h, k);
    CHECK(rel_l2(lhs, rhs, h) < 1e-3);
  }
}

TEST_CASE("closed-form and finite-difference de Turck linearisations agree") {
  const CohomMetric h = eguchi_hanson(1.0, eh_grid());
  std::mt19937 rng(11);
  const InvariantTensor k = random_tensor(h, rng);
  const Vec a = deturck_linear(h, k).comp, b = deturck_linearized(h, k).comp;
  CHECK((a - b).abs().maxCoeff() < 1e-6 * b.abs().maxCoeff() + 1e-9);
}

TEST_CASE("Ricci is scale invariant and DRic vanishes on the family tangent") {
  const CohomMetric h = eguchi_hanson(1.0, eh_grid());
  InvariantTensor id{Eigen::ArrayX4d::Ones(h.size(), 4), h.label};
  // Exact cancellation; what remains is rounding amplified by the 1/s of the difference quotient.
  CHECK(linearized_ricci(h, id).frame.abs().maxCoeff() < 1e-4);
  // Ric(h_eps) vanishes up to the eps-smooth grid residual, so DRic(d_eps h) is O(gap^2).
  auto fine = std::make_shared<const RadialGrid>(refine(*eh_grid()));
  const CohomMetric hf = eguchi_hanson(1.0, fine);
  const double e1 = linearized_ricci(h, eh_family_tangent(h)).frame.abs().maxCoeff();
  const double e2 = linearized_ricci(hf, eh_family_tangent(hf)).frame.abs().maxCoeff();
  CHECK(e2 < 1e-4);
  CHECK(e1 / e2 > 2.5);
}

TEST_CASE("Lichnerowicz is self-adjoint on compactly supported tensors") {
  const CohomMetric h = eguchi_hanson(1.0, make_grid(40.0, 4000, 1.001));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const InvariantTensor a = random_tensor(h, rng), b = random_tensor(h, rng);
    const double x = l2_inner(lichnerowicz(h, a), b, h), y = l2_inner(a, lichnerowicz(h, b), h);
    MESSAGE("self-adjointness defect " << std::abs(x - y) / std::abs(x));
    CHECK(std::abs(x - y) <= 1e-6 * std::abs(x) + 1e-12);
  }
}

TEST_CASE("Lie derivative of the Euler field on flat space") {
  auto grid = make_grid(5.0, 500, 1.0);
  const CohomMetric h = flat_metric(grid);
  const InvariantTensor l = lie_derivative(RadialVector{grid->nodes}, h);
  CHECK((l.frame - 2.0).abs().maxCoeff() < 1e-10);
  CHECK(lie_derivative(RadialVector{Vec::Zero(h.size())}, h).frame.abs().maxCoeff() == 0.0);
}

TEST_CASE("Lie derivative matches the pullback oracle") {
  auto grid = eh_grid();
  const CohomMetric h = eguchi_hanson(1.0, grid);
  const Vec& u = grid->nodes;
  const Vec phi = u * (-(u - 2.0).square()).exp();
  const double s = 1e-5;
  // Pull back by u -> u + s phi: A(u) -> A(u + s phi)(1 + s phi')^2, B_i(u) -> B_i(u + s phi).
  const CohomMetric exact = eguchi_hanson(1.0, grid);
  CohomMetric pulled = exact;
  const auto coeff = [&](double x, int c) {
    const double r = std::sqrt(std::max(0.0, interpolate(*grid, exact.r.square(), x)));
    return eh_coefficients_at_r(1.0, r)[c];
  };
  const Vec dphi = derivative(phi, 1, *grid, Parity::Odd);
  for (Eigen::Index p = 1; p < h.size() - 1; ++p) {
    const double x = u[p] + s * phi[p];
    pulled.comps(p, 0) = 1.0 * std::pow(1.0 + s * dphi[p], 2);
    for (int c = 1; c < 4; ++c) {
      // B_i in the geodesic chart equals the r-chart coefficient at r(u).
      const double base = coeff(u[p], c);
      pulled.comps(p, c) = h.comps(p, c) * coeff(x, c) / base;
    }
  }
  const InvariantTensor oracle{(pulled.comps - h.comps) / (s * h.comps), h.label};
  const InvariantTensor lie = lie_derivative(RadialVector{phi}, h);
  for (Eigen::Index p = 20; p < h.size() - 20; p += 50)
    for (int c = 0; c < 4; ++c) CHECK(std::abs(lie.frame(p, c) - oracle.frame(p, c)) < 2e-3);
}

TEST_CASE("de Turck field of a radial pullback on flat space") {
  auto grid = make_grid(10.0, 2000, 1.0);
  const CohomMetric h = flat_metric(grid);
  const Vec& u = grid->nodes;
  const Vec phi = u.square() * u * (-u.square()).exp();
  const Vec dphi = (3.0 * u.square() - 2.0 * u.square().square()) * (-u.square()).exp();
  const double s = 1e-4;
  CohomMetric g = h;
  g.label = "pulled";
  g.comps.col(0) = (1.0 + s * dphi).square();
  for (int c = 1; c < 4; ++c) g.comps.col(c) = (u + s * phi).square();
  g.comps(0, 1) = g.comps(0, 2) = g.comps(0, 3) = 0.0;
  const Vec V = deturck_field(g, h).comp;
  // Vector Laplacian of phi d/du in four flat dimensions.
  const Vec d2 = derivative(phi, 2, *grid, Parity::Odd);
  for (Eigen::Index p = 40; p < 1200; p += 37) {
    const double lap = d2[p] + 3.0 * dphi[p] / u[p] - 3.0 * phi[p] / (u[p] * u[p]);
    CHECK(std::abs(V[p] - s * lap) < 1e-3 * s);
  }
  CHECK(deturck_field(h, h).comp.abs().maxCoeff() == 0.0);
}

TEST_CASE("mixed evolution reduces to the heat semigroup") {
  const CohomMetric h = eguchi_hanson(1.0, eh_grid());
  std::mt19937 rng(5);
  const InvariantTensor k = random_tensor(h, rng);
  const MetricPath same = [&](double) { return h; };
  const auto sc = make_schedule(1.0, 2.5, 0.05);
  const InvariantTensor a = mixed_evolution(sc, same, same, h, k);
  DtPolicy pol;
  pol.dt0 = 0.05;
  pol.scheme = Scheme::ImplicitEuler;
  const InvariantTensor b = heat_semigroup(h, k, 1.5, pol);
  CHECK((a.frame - b.frame).abs().maxCoeff() < 1e-10);
}

TEST_CASE("schedules") {
  auto sc = make_schedule(1.0, 1.5, 0.1);
  REQUIRE(sc.legs().size() == 1);
  CHECK(sc.legs()[0].generator == Generator::Mixed);
  sc = make_schedule(1.0, 5.0, 0.1);
  REQUIRE(sc.legs().size() == 2);
  CHECK(sc.switch_time() == 4.0);
  CHECK_THROWS_AS(make_schedule(3.0, 2.0, 0.1), DomainError);
}

TEST_CASE("splitting identity of the mixed operator") {
  auto grid = eh_grid();
  const CohomMetric hinf = eguchi_hanson(1.0, grid);
  std::mt19937 rng(9);
  const InvariantTensor k = random_tensor(hinf, rng);
  const MetricPath hp = [&](double t) { return eh_family(1.0 + 0.01 / t, 1.0, grid); };
  const MetricPath gp = [&](double t) {
    const CohomMetric h = hp(t);
    InvariantTensor bump = InvariantTensor::zero(h.size(), h.label);
    bump.frame.col(2) = 0.02 * (-(h.nodes() - 2.0).square()).exp() / t;
    return perturb(h, bump);
  };
  const InvariantTensor whole = mixed_evolution(make_schedule(1.0, 5.0, 0.05), gp, hp, hinf, k);
  DtPolicy pol;
  pol.dt0 = 0.05;
  pol.scheme = Scheme::ImplicitEuler;
  const InvariantTensor first = heat_semigroup(hinf, k, 3.0, pol);
  const InvariantTensor split = mixed_evolution(make_schedule(4.0, 5.0, 0.05), gp, hp, hinf, first);
  CHECK(rel_l2(split, whole, hinf) < 1e-6);
}

TEST_CASE("Duhamel sum, sweep and linearity") {
  auto grid = make_grid(15.0, 600, 1.0);
  const CohomMetric h = flat_metric(grid);
  const Vec& u = grid->nodes;
  InvariantTensor F = InvariantTensor::zero(h.size(), h.label);
  for (int a = 0; a < 4; ++a) F.frame.col(a) = (-(u - 1.0 - a).square()).exp();
  const MetricPath same = [&](double) { return h; };
  const auto sc = make_schedule(1.0, 3.0, 0.05);
  const std::vector<InvariantTensor> src(40, F);
  const auto zero = InvariantTensor::zero(h.size(), h.label);
  const InvariantTensor a = duhamel(sc, same, same, h, zero, src);
  const InvariantTensor b = duhamel_stepping(sc, same, same, h, zero, src);
  CHECK((a.frame - b.frame).abs().maxCoeff() < 1e-4);

  std::mt19937 rng(1);
  InvariantTensor k = random_tensor(h, rng);
  const std::vector<InvariantTensor> src2(40, 2.0 * F);
  const std::vector<InvariantTensor> src3(40, 3.0 * F);
  const InvariantTensor lhs = duhamel(sc, same, same, h, k, src3);
  const InvariantTensor rhs = duhamel(sc, same, same, h, k, src) + duhamel(sc, same, same, h, zero, src2);
  CHECK((lhs.frame - rhs.frame).abs().maxCoeff() < 1e-10);
  const InvariantTensor none = duhamel(sc, same, same, h, k, std::vector<InvariantTensor>(40, zero));
  CHECK((none.frame - mixed_evolution(sc, same, same, h, k).frame).abs().maxCoeff() < 1e-14);
}
