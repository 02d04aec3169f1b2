#include <cmath>

#include "alelab/geometry.hpp"
#include "doctest.h"

using namespace alelab;

TEST_CASE("EH coefficients at r = eps") {
  const auto c = eh_coefficients_at_r(1.0, 1.0);
  CHECK(c[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(c[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(c[2] == doctest::Approx(std::sqrt(2.0)));
  CHECK(c[3] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("EH is Ricci flat and converges under refinement") {
  auto coarse = make_grid(40.0, 800, 1.004);
  auto fine = std::make_shared<const RadialGrid>(refine(*coarse));
  const double e1 = ricci_tensor(eguchi_hanson(1.0, coarse)).frame.abs().maxCoeff();
  const double e2 = ricci_tensor(eguchi_hanson(1.0, fine)).frame.abs().maxCoeff();
  MESSAGE("EH Ric errors " << e1 << " " << e2);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("flat metric has zero curvature") {
  auto g = make_grid(10.0, 400, 1.005);
  const auto ric = ricci_tensor(flat_metric(g));
  CHECK(ric.frame.abs().maxCoeff() < 1e-6);
}

#include "curvature_oracle.hpp"

namespace {

CohomMetric sample(const oracle::Ansatz& a, GridPtr grid) {
  CohomMetric g;
  g.grid = grid;
  g.comps.resize(grid->size(), 4);
  for (Eigen::Index p = 0; p < grid->size(); ++p) {
    const double u = grid->nodes[p];
    g.comps.row(p) << a.A(u), a.B1(u), a.B2(u), a.B3(u);
  }
  g.r = grid->nodes;
  g.label = "sampled";
  return g;
}

void compare_with_oracle(const oracle::Ansatz& a, GridPtr grid) {
  const auto ric = ricci_tensor(sample(a, grid));
  for (double target : {0.7, 1.3, 2.0, 3.1, 4.4}) {
    Eigen::Index p = 0;
    (grid->nodes - target).abs().minCoeff(&p);
    const Eigen::Vector4d x(grid->nodes[p], 1.1, 0.3, 0.7);
    const Eigen::Matrix4d R = oracle::frame_ricci(a, x);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(ric.frame(p, i) - R(i, i)) < 1e-4);
    CHECK((R - Eigen::Matrix4d(R.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-4);
  }
}

}  // namespace

TEST_CASE("round cylinder matches the coordinate-chart oracle") {
  const double c = 1.7;
  oracle::Ansatz a{[](double) { return 1.0; }, [c](double) { return c; }, [c](double) { return c; },
                   [c](double) { return c; }};
  auto grid = make_grid(6.0, 3000, 1.0);
  const auto ric = ricci_tensor(sample(a, grid));
  CHECK(ric.frame(100, 1) == doctest::Approx(2.0 / c).epsilon(1e-10));
  compare_with_oracle(a, grid);
}

TEST_CASE("generic Bianchi IX metric matches the coordinate-chart oracle") {
  oracle::Ansatz a{[](double u) { return 1.0 + 0.2 * std::sin(u); },
                   [](double u) { return 1.0 + 0.3 * u * u; },
                   [](double u) { return 2.0 + 0.1 * std::cos(u); },
                   [](double u) { return 1.5 + 0.5 * u; }};
  compare_with_oracle(a, make_grid(6.0, 4000, 1.0));
}

TEST_CASE("collapsing fibre matches the coordinate-chart oracle") {
  oracle::Ansatz a{[](double) { return 1.0; },
                   [](double u) { return u * u / (1.0 + 0.2 * u * u); },
                   [](double u) { return 1.0 + u * u; },
                   [](double u) { return 1.2 + u * u; }};
  auto grid = make_grid(6.0, 4000, 1.0);
  auto g = sample(a, grid);
  g.comps(0, 1) = 0.0;
  compare_with_oracle(a, grid);
}
