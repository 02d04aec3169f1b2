#include <cmath>
#include <random>

#include "alelab/errors.hpp"
#include "alelab/norms.hpp"
#include "alelab/psc.hpp"
#include "doctest.h"

using namespace alelab;

namespace {

GridPtr psc_grid() {
  static GridPtr g = make_grid(100.0, 600, 1.01);
  return g;
}

}  // namespace

TEST_CASE("finite-volume laplacian of r^2 on the flat cone is 2n") {
  const CohomMetric f = flat_metric(make_grid(20.0, 400, 1.005));
  const Vec lap = laplace_beltrami(f, f.r.square());
  CHECK(lap.head(f.size() - 1).maxCoeff() == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(lap.head(f.size() - 1).minCoeff() == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("poisson solve inverts the laplacian") {
  const CohomMetric h = eguchi_hanson(1.0, psc_grid());
  const Vec rhs = source_profile(h, {}, 3.0);
  const Vec u = solve_poisson(h, rhs);
  CHECK(u[h.size() - 1] == 0.0);
  const Vec back = laplace_beltrami(h, u);
  CHECK((back + rhs).head(h.size() - 1).abs().maxCoeff() <= 1e-9 * rhs.abs().maxCoeff());
}

TEST_CASE("conformal scal linearises to 3 Lap u") {
  auto grid = make_grid(100.0, 1200, 1.005);
  const CohomMetric h = eguchi_hanson(1.0, grid);
  const Vec u = conformal_psc_sequence(h, 3.0, 1).factors[0];
  const Vec lin = -3.0 * laplace_beltrami(h, u);
  const Eigen::Index keep = h.size() - 4;
  const double s = 1e-4;
  // Full frame curvature, not the conformal formula.
  const Vec d = (scalar_curvature(conformal_metric(h, s * u)) - scalar_curvature(h)) / s;
  const double rel = (d - lin).head(keep).abs().maxCoeff() / lin.abs().maxCoeff();
  MESSAGE("linearisation rel " << rel);
  CHECK(rel <= 1e-3);
}

TEST_CASE("conformal family at p = 3") {
  const CohomMetric h = eguchi_hanson(1.0, psc_grid());
  const ConformalFamily fam = conformal_psc_sequence(h, 3.0, 4);
  REQUIRE(fam.metrics.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(fam.min_scal[i] > 0.0);
    CHECK((1.0 + fam.factors[i]).minCoeff() > 0.0);
  }
  for (int i = 1; i < 4; ++i) {
    const double a = fam.norm_lp[i - 1] + fam.norm_inf[i - 1], b = fam.norm_lp[i] + fam.norm_inf[i];
    CHECK(a / b >= 1.8);
  }
}

TEST_CASE("conformal family rejects p <= 2") {
  const CohomMetric h = eguchi_hanson(1.0, psc_grid());
  CHECK_THROWS_AS(conformal_psc_sequence(h, 2.0, 2), DomainError);
  CHECK_THROWS_AS(conformal_psc_sequence(h, 1.5, 2), DomainError);
}

TEST_CASE("zero conformal factor has zero scal") {
  const CohomMetric h = flat_metric(psc_grid());
  const Vec sc = conformal_scal(h, Vec::Zero(h.size()));
  CHECK(sc.abs().maxCoeff() == 0.0);
}

TEST_CASE("positivity run") {
  const CohomMetric h = eguchi_hanson(1.0, psc_grid());
  PositivityOptions o;
  o.t_end = 0.2;
  o.dt = 0.02;
  SUBCASE("eh stays put") {
    const PositivityReport rep = scal_positivity_run(h, h, o);
    CHECK(rep.precondition);
    // d_t scal = 0, so the defect is the spatial floor alone.
    CHECK(rep.worst_ratio <= 1.0 + 1e-9);
    for (double m : rep.mins) CHECK(m == 0.0);
  }
  SUBCASE("conformal data with random sources") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> amp(0.02, 0.08), ctr(2.0, 5.0), wid(0.5, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
      SourceProfile s{amp(rng), ctr(rng), wid(rng), 0.0};
      const CohomMetric g0 = conformal_psc_sequence(h, 3.0, 1, s).metrics[0];
      const PositivityReport rep = scal_positivity_run(g0, h, o);
      CHECK(rep.precondition);
      CHECK(rep.min_scal >= -1e-6);
      CHECK(rep.worst_ratio <= 10.0);
    }
  }
  SUBCASE("negative pocket is flagged") {
    const Vec f = source_profile(h, {}, 3.0);
    const CohomMetric g0 = conformal_metric(h, solve_poisson(h, -f / 3.0));
    const PositivityReport rep = scal_positivity_run(g0, h, o);
    CHECK_FALSE(rep.precondition);
    CHECK(rep.times.empty());
  }
}

TEST_CASE("rigidity experiment") {
  const CohomMetric h = eguchi_hanson(1.0, psc_grid());
  SUBCASE("eh input") {
    const RigidityReport rep = rigidity_experiment(h, h, 1.5);
    CHECK(rep.positivity);
    for (const auto& [t, v] : rep.samples) CHECK(std::abs(v - rep.samples.front().second) <= 1e-12);
  }
  SUBCASE("conformal input") {
    const CohomMetric g0 = conformal_psc_sequence(h, 3.0, 1).metrics[0];
    const RigidityReport r3 = rigidity_experiment(h, g0, 3.0);
    const RigidityReport r15 = rigidity_experiment(h, g0, 1.5);
    CHECK(r3.predicted_upper == doctest::Approx(-5.0 / 3.0));
    CHECK(r15.predicted_upper == doctest::Approx(-7.0 / 3.0));
    CHECK(r3.heat_floor == -2.0);
    CHECK_FALSE(r3.fit_degenerate);
    CHECK(r3.positivity);
    CHECK(r3.fitted >= -2.0);
  }
  SUBCASE("rejected inputs") {
    CHECK_THROWS_AS(rigidity_experiment(h, h, 2.0), DomainError);
    CHECK_THROWS_AS(rigidity_experiment(h, h, 1.0), DomainError);
  }
}
