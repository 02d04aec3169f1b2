#include "alelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "alelab/errors.hpp"
#include "alelab/gauge.hpp"
#include "alelab/norms.hpp"
#include "alelab/psc.hpp"
#include "alelab/rates.hpp"

namespace alelab {

Check check_le(std::string name, double value, double limit) {
  return {std::move(name), value <= limit, value, limit, "<=", 0.0};
}

Check check_ge(std::string name, double value, double limit) {
  return {std::move(name), value >= limit, value, limit, ">=", 0.0};
}

Check check_in(std::string name, double value, double lo, double hi) {
  return {std::move(name), value >= lo && value <= hi, value, hi, "in", lo};
}

void CriterionResult::finish() {
  pass = !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

InvariantTensor random_tensor(const CohomMetric& h, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), C(1.0, 4.0);
  const Vec& u = h.nodes();
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  const double b = U(rng);
  const Vec core = (-u.square()).exp();
  for (int a = 0; a < 4; ++a) {
    const double c = C(rng), w = 0.5 + 0.5 * (U(rng) + 1.0);
    Vec col = U(rng) * (1.0 - core) * (-(u - c).square() / (w * w)).exp();
    col += (a < 2 ? b : U(rng)) * core;
    k.frame.col(a) = col;
  }
  return k;
}

Vec tail_profile(const CohomMetric& h, double tail, double taper, double core, bool bolt_factor) {
  const Vec rho2 = smooth_radius_sq(h);
  Vec p = (core * core + rho2).pow(-0.5 * tail) * (-(rho2 / (taper * taper)).square()).exp();
  if (bolt_factor) p *= 1.0 - (-h.nodes().square()).exp();
  return p;
}

namespace {

const Eigen::Array4d kDirection(1.0, -0.5, 0.3, 0.7);

struct GridDefaults {
  double r_max;
  int n;
  double stretch;
};

GridPtr grid_from(const Config& cfg, GridDefaults d) {
  return make_grid(cfg.number("grid.r_max", d.r_max), cfg.integer("grid.n", d.n), cfg.number("grid.stretch", d.stretch),
                   cfg.integer("grid.ghost", 2));
}

CohomMetric background_from(const Config& cfg, GridPtr grid, const std::string& kind) {
  const std::string k = cfg.text("background.kind", kind);
  if (k == "flat") return flat_metric(grid);
  return eguchi_hanson(cfg.number("background.eps", 1.0), grid);
}

struct PerturbationDefaults {
  std::string profile = "bump";
  double amplitude = 0.01;  // L^2(h) norm of k_0
  double center = 3.0, width = 1.0;
  double tail = 0.0;        // 0: compact bump
};

InvariantTensor perturbation_from(const Config& cfg, const CohomMetric& h, const PerturbationDefaults& d) {
  const std::string profile = cfg.text("perturbation.profile", d.profile);
  const double amp = cfg.number("perturbation.amplitude", d.amplitude);
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  if (profile == "kernel") {
    k = kernel_element(h);
  } else if (profile == "conformal") {
    SourceProfile s;
    s.center = cfg.number("perturbation.center", s.center);
    s.width = cfg.number("perturbation.width", s.width);
    s.tail_exponent = cfg.number("perturbation.tail_exponent", s.tail_exponent);
    k = difference(conformal_psc_sequence(h, 3.0, 1, s).metrics[0], h);
  } else {
    const Vec& u = h.nodes();
    const double c = cfg.number("perturbation.center", d.center), w = cfg.number("perturbation.width", d.width);
    const double tail = cfg.number("perturbation.tail_exponent", d.tail);
    Vec prof = Vec::Zero(h.size());
    if (profile == "bump") prof = (1.0 - (-u.square()).exp()) * (-((u - c) / w).square()).exp();
    else if (profile != "tail") throw ConfigError("unknown perturbation.profile " + profile);
    if (tail > 0.0) prof += tail_profile(h, tail, 0.75 * h.grid->r_max);
    for (int a = 0; a < 4; ++a) k.frame.col(a) = kDirection[a] * prof;
  }
  const double n = std::sqrt(l2_inner(k, k, h));
  if (!(n > 0.0)) throw ConfigError("perturbation has zero norm on this grid");
  return (amp / n) * k;
}

std::vector<double> geometric_times(double lo, double hi, int per_decade) {
  std::vector<double> t;
  const int m = static_cast<int>(std::ceil(per_decade * std::log10(hi / lo) - 1e-9));
  for (int i = 0; i <= m; ++i) t.push_back(std::min(hi, lo * std::pow(10.0, static_cast<double>(i) / per_decade)));
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

Scheme scheme_from(const Config& cfg) {
  return cfg.text("flow.scheme", "bdf2") == "implicit_euler" ? Scheme::ImplicitEuler : Scheme::BDF2;
}

double l2(const InvariantTensor& k, const CohomMetric& h) { return std::sqrt(l2_inner(k, k, h)); }

}  // namespace

CriterionResult rates_criterion(const Config& cfg) {
  CriterionResult r{"AC1", "convolution-rate lemma"};
  const auto w = cfg.numbers("fit.window", {1e2, 1e5});
  static const double pairs[12][2] = {{2, 2},   {0.5, 3}, {1, 2},     {1.5, 1.5}, {3, 0.8},   {0.7, 2},
                                      {1, 1},   {0.5, 1}, {1, 0.3},   {0.3, 0.4}, {0.2, 0.5}, {0.5, 0.5}};
  auto& table = r.tables["rates"];
  for (const auto& p : pairs) {
    const RateClass c = convolution_rate_class(p[0], p[1]);
    std::vector<std::pair<double, double>> s;
    for (double t : geometric_times(w[0], w[1], 10)) s.emplace_back(t, convolution_integral(p[0], p[1], t));
    const RateFit f = fit_rate(s, c.has_log);
    const double tol = c.has_log ? 0.08 : 0.03;
    char name[64];
    std::snprintf(name, sizeof name, "exponent error (%g,%g)", p[0], p[1]);
    r.checks.push_back(check_le(name, std::abs(f.exponent - c.exponent), tol));
    table.push_back({{"alpha", p[0]},
                     {"beta", p[1]},
                     {"predicted_exponent", c.exponent},
                     {"fitted_exponent", f.exponent},
                     {"log_flag", c.has_log ? 1.0 : 0.0},
                     {"residual", f.residual}});
  }
  r.finish();
  return r;
}

CriterionResult eh_ricci_criterion(const Config& cfg) {
  CriterionResult r{"AC2", "Eguchi-Hanson Ricci-flatness"};
  const GridPtr fine = grid_from(cfg, {400.0, 4000, 1.002});
  const GridPtr coarse = make_grid(fine->r_max, (static_cast<int>(fine->size()) + 1) / 2, fine->stretch * fine->stretch,
                                   fine->ghost_count);
  const double eps = cfg.number("background.eps", 1.0);
  const double ef = ricci_tensor(eguchi_hanson(eps, fine)).frame.abs().maxCoeff();
  const double ec = ricci_tensor(eguchi_hanson(eps, coarse)).frame.abs().maxCoeff();
  r.checks.push_back(check_le("max |Ric| on the reference grid", ef, 1e-5));
  r.checks.push_back(check_ge("refinement ratio", ec / ef, 3.5));
  r.tables["grids"] = {{{"n", double(coarse->size())}, {"max_gap", coarse->max_gap()}, {"max_ric", ec}},
                       {{"n", double(fine->size())}, {"max_gap", fine->max_gap()}, {"max_ric", ef}}};
  r.finish();
  return r;
}

CriterionResult heat_criterion(const Config& cfg) {
  CriterionResult r{"AC3", "heat-semigroup rates"};
  const GridPtr grid = grid_from(cfg, {400.0, 1500, 1.004});
  const CohomMetric h = background_from(cfg, grid, "flat");
  // A small core keeps the profile close to its scale-invariant shape from t = 1 on.
  const Vec prof = tail_profile(h, cfg.number("perturbation.tail_exponent", 2.0), 0.75 * grid->r_max, 0.3, false);
  InvariantTensor k = InvariantTensor::zero(h.size(), h.label);
  for (int a = 0; a < 4; ++a) k.frame.col(a) = prof;
  const auto w = cfg.numbers("fit.window", {1.0, 100.0});
  DtPolicy pol;
  pol.dt0 = cfg.number("flow.dt0", 0.01);
  pol.growth = 1.02;
  pol.dt_max = 0.5;
  pol.scheme = scheme_from(cfg);
  NormSpec L2, L4, Linf;
  L4.p = 4.0;
  Linf.p = kInfinity;
  const double n0 = norm(k, L2, h);
  std::vector<std::pair<double, double>> s4, si;
  double t = 0.0;
  auto& table = r.tables["samples"];
  for (double tt : geometric_times(w[0], w[1], 10)) {
    k = heat_semigroup(h, k, tt - t, pol);
    t = tt;
    const double a = norm(k, L4, h) / n0, b = norm(k, Linf, h) / n0;
    s4.emplace_back(t, a);
    si.emplace_back(t, b);
    table.push_back({{"t", t}, {"L2", norm(k, L2, h) / n0}, {"L4", a}, {"Linf", b}});
  }
  const RateFit f4 = fit_power_law(s4, false), fi = fit_power_law(si, false);
  r.fits = {{"L4_over_L2", f4}, {"Linf_over_L2", fi}};
  r.checks.push_back(check_in("L2->L4 exponent", f4.exponent, -0.6, -0.4));
  r.checks.push_back(check_in("L2->Linf exponent", fi.exponent, -1.1, -0.9));
  r.finish();
  return r;
}

CriterionResult kernel_criterion(const Config& cfg) {
  CriterionResult r{"AC4", "kernel certificate"};
  const GridPtr grid = grid_from(cfg, {400.0, 4000, 1.002});
  const double eps = cfg.number("background.eps", 1.0);
  const KernelBasis b = kernel_basis(eps, grid);
  const CohomMetric h = eguchi_hanson(eps, grid);
  const InvariantTensor& e = b.elements.at(0);
  std::vector<std::pair<double, double>> s;
  for (Eigen::Index p = 0; p < h.size(); ++p)
    if (h.r[p] >= 10.0 * eps && h.r[p] <= 0.5 * grid->r_max) s.emplace_back(h.r[p], std::sqrt(e.frame.row(p).square().sum()));
  const RateFit f = fit_power_law(s, false, 1e-300);
  r.fits = {{"kernel_decay", f}};
  r.checks.push_back(check_le("|Delta_L e| / |e|_W22", b.residual, 1e-3));
  r.checks.push_back(check_in("pointwise decay exponent", f.exponent, -4.3, -3.7));
  r.finish();
  return r;
}

std::vector<CriterionResult> stability_criteria(const Config& cfg) {
  CriterionResult a{"AC5", "stability of Eguchi-Hanson"}, v{"AC7", "de Turck field improvement"};
  const GridPtr grid = grid_from(cfg, {400.0, 1000, 1.006});
  const CohomMetric h = background_from(cfg, grid, "eh");
  PerturbationDefaults d;
  d.profile = "tail";
  d.tail = 2.0;
  const InvariantTensor k0 = perturbation_from(cfg, h, d);
  FlowOptions o;
  o.dt.dt0 = cfg.number("flow.dt0", 0.01);
  o.dt.growth = 1.02;
  o.dt.dt_max = 0.5;
  o.t_end = cfg.number("flow.t_end", 200.0);
  o.record_residual = true;
  const double T = o.t_end;
  o.snapshot_times = cfg.numbers("flow.snapshot_times", geometric_times(1.0, T, 20));
  for (double t : {T / 4, T / 2}) o.snapshot_times.push_back(t);
  std::sort(o.snapshot_times.begin(), o.snapshot_times.end());
  o.snapshot_times.erase(std::unique(o.snapshot_times.begin(), o.snapshot_times.end()), o.snapshot_times.end());
  if (o.snapshot_times.back() >= T) o.snapshot_times.pop_back();

  Trajectory tr = run_moving_gauge(perturb(h, k0), o);
  const double hi = std::min(T, std::pow(grid->r_max / 4.0, 2));
  const auto w = cfg.numbers("fit.window", {5.0, hi});
  const auto fits = flow_diagnostics(tr, {{"Linf_k", w[0], w[1], false}, {"L4_k", w[0], w[1], false},
                                          {"L2_k", w[0], w[1], false}, {"V_C0", w[0], w[1], false},
                                          {"Ric_C0", w[0], w[1], false}});
  auto eps_at = [&](double t) {
    const auto it = std::min_element(tr.rows.begin(), tr.rows.end(),
                                     [&](const auto& x, const auto& y) { return std::abs(x.t - t) < std::abs(y.t - t); });
    return it->eps;
  };
  const double e1 = eps_at(T), e2 = eps_at(T / 2), e4 = eps_at(T / 4);
  a.fits = {fits[0], fits[1], fits[2]};
  a.checks.push_back(check_le("Linf exponent", fits[0].fit.exponent, -0.8));
  a.checks.push_back(check_in("L4 exponent", fits[1].fit.exponent, -0.65, -0.35));
  a.checks.push_back(check_le("eps Cauchy: |eps(T)-eps(T/2)| - 0.1|eps(T/2)-eps(T/4)|", std::abs(e1 - e2) - 0.1 * std::abs(e2 - e4),
                              1e-6));
  a.tables["eps"] = {{{"t", T / 4}, {"eps", e4}}, {{"t", T / 2}, {"eps", e2}}, {{"t", T}, {"eps", e1}}};
  v.fits = {fits[3], fits[4]};
  v.checks.push_back(check_le("V_C0 exponent - Linf exponent", fits[3].fit.exponent - fits[0].fit.exponent, -0.3));
  a.trajectories.emplace_back("stability", std::move(tr));
  a.finish();
  v.finish();
  return {a, v};
}

CriterionResult picard_criterion(const Config& cfg) {
  CriterionResult r{"AC6", "Picard fixed point"};
  const GridPtr grid = grid_from(cfg, {40.0, 600, 1.01});
  const CohomMetric h = background_from(cfg, grid, "eh");
  PerturbationDefaults d;
  d.amplitude = 0.2;
  const CohomMetric g0 = perturb(h, perturbation_from(cfg, h, d));
  PicardOptions po;
  po.dt = cfg.number("flow.dt0", 0.02);
  po.t_end = cfg.number("flow.t_end", 10.0);
  // Reach t = 1 in the h gauge, then restart from (Phi(g_1), g_1 - Phi(g_1)).
  FlowOptions pre;
  pre.dt.dt0 = pre.dt.dt_max = po.dt;
  pre.t_end = 1.0;
  pre.record_residual = false;
  const CohomMetric g1 = run_fixed_gauge(g0, h, pre).snapshots.back().g;
  const ProjectionResult start = moduli_projection(g1);
  PicardState st;
  bool converged = true;
  try {
    st = picard_solve(start.point.h, start.k, po);
  } catch (const NonContractionError&) {
    converged = false;
  }
  auto& table = r.tables["distances"];
  for (std::size_t i = 0; i < st.distances.size(); ++i)
    table.push_back({{"iteration", double(i + 1)}, {"distance", st.distances[i]}});
  double ratio = 1.0;
  if (st.distances.size() >= 2) {
    const std::size_t j = std::min<std::size_t>(st.distances.size(), 3) - 1;
    ratio = st.distances[j] / st.distances[j - 1];
  }
  r.checks.push_back(check_le("contraction ratio by iteration 3", ratio, 0.5));
  r.checks.push_back(check_le("iterations", converged ? double(st.iterations) : 1e9, 8.0));

  // Direct moving-gauge integration from the same restart point.
  FlowOptions m;
  m.dt.dt0 = m.dt.dt_max = st.times.size() > 1 ? st.times[1] - st.times[0] : po.dt;
  m.t_end = po.t_end - 1.0;
  m.switch_time = 0.0;
  m.record_residual = false;
  for (std::size_t i = 1; i + 1 < st.times.size(); ++i) m.snapshot_times.push_back(st.times[i] - 1.0);
  double worst = converged ? 0.0 : 1e9;
  if (converged && !st.times.empty()) {
    Trajectory direct = run_moving_gauge(g1, m);
    for (const auto& s : direct.snapshots) {
      const auto it = std::min_element(st.times.begin(), st.times.end(),
                                       [&](double x, double y) { return std::abs(x - 1.0 - s.t) < std::abs(y - 1.0 - s.t); });
      const std::size_t i = static_cast<std::size_t>(it - st.times.begin());
      const InvariantTensor kp = reframe(st.k[i], st.h[i], h), kd = reframe(*s.k, *s.h, h);
      const double nd = l2(kd, h);
      if (nd > 0.0) worst = std::max(worst, l2(kp - kd, h) / nd);
    }
    r.trajectories.emplace_back("picard_direct", std::move(direct));
    r.trajectories.emplace_back("picard_fixed_point", picard_trajectory(st, h, 1.1));
  }
  r.checks.push_back(check_le("sup relative L2 gap to direct run", worst, 1e-3));
  r.finish();
  return r;
}

CriterionResult psc_criterion(const Config& cfg) {
  CriterionResult r{"AC8", "scalar curvature suite"};
  const GridPtr grid = grid_from(cfg, {100.0, 600, 1.01});
  const CohomMetric h = eguchi_hanson(cfg.number("background.eps", 1.0), grid);
  const double p = cfg.numbers("norms.p_list", {3.0}).front();

  const ConformalFamily fam = conformal_psc_sequence(h, p, 4);
  auto& norms = r.tables["norms_by_i"];
  for (int i = 0; i < 4; ++i) {
    norms.push_back({{"i", double(i + 1)},
                     {"shrink", fam.shrink[i]},
                     {"min_scal", fam.min_scal[i]},
                     {"norm_lp", fam.norm_lp[i]},
                     {"norm_inf", fam.norm_inf[i]}});
    r.checks.push_back(check_ge("min scal g_" + std::to_string(i + 1) + " (> 0)", fam.min_scal[i] > 0.0 ? 1.0 : 0.0, 1.0));
    if (i > 0)
      r.checks.push_back(check_ge("norm decrease " + std::to_string(i) + "->" + std::to_string(i + 1),
                                  (fam.norm_lp[i - 1] + fam.norm_inf[i - 1]) / (fam.norm_lp[i] + fam.norm_inf[i]), 1.8));
  }

  std::mt19937 rng(static_cast<unsigned>(cfg.integer("seed", 7)));
  std::uniform_real_distribution<double> amp(0.02, 0.08), ctr(2.0, 5.0), wid(0.5, 1.5);
  PositivityOptions po;
  po.t_end = cfg.number("flow.t_end", 1.0);
  po.dt = cfg.number("flow.dt0", 0.02);
  auto& pos = r.tables["positivity"];
  for (int trial = 0; trial < 5; ++trial) {
    SourceProfile s{amp(rng), ctr(rng), wid(rng), 0.0};
    const CohomMetric g0 = conformal_psc_sequence(h, 3.0, 1, s).metrics[0];
    const PositivityReport rep = scal_positivity_run(g0, h, po);
    pos.push_back({{"trial", double(trial)},
                   {"amplitude", s.amplitude},
                   {"center", s.center},
                   {"width", s.width},
                   {"initial_min_scal", rep.initial_min_scal},
                   {"min_scal", rep.min_scal},
                   {"max_defect", rep.max_defect},
                   {"max_budget", rep.max_budget},
                   {"worst_ratio", rep.worst_ratio}});
    const std::string tag = " (trial " + std::to_string(trial) + ")";
    r.checks.push_back(check_ge("precondition scal_g0 >= 0" + tag, rep.precondition ? 1.0 : 0.0, 1.0));
    r.checks.push_back(check_ge("min scal" + tag, rep.min_scal, -1e-6));
    r.checks.push_back(check_le("super-heat defect / step budget" + tag, rep.worst_ratio, 10.0));
  }

  auto& rig = r.tables["rigidity"];
  for (double q : {1.5, 3.0}) {
    const RigidityReport rep = rigidity_experiment(h, fam.metrics[0], q);
    rig.push_back({{"p", q},
                   {"predicted_upper", rep.predicted_upper},
                   {"heat_floor", rep.heat_floor},
                   {"fitted", rep.fitted},
                   {"positivity", rep.positivity ? 1.0 : 0.0}});
    if (q == 3.0) r.checks.push_back(check_ge("rigidity p=3 fitted exponent", rep.fitted, rep.heat_floor));
  }
  r.finish();
  return r;
}

CriterionResult adm_criterion(const Config& cfg) {
  CriterionResult r{"AC9", "ADM mass"};
  const GridPtr grid = grid_from(cfg, {400.0, 4000, 1.002});
  const double eps = cfg.number("background.eps", 1.0);
  const CohomMetric h = eguchi_hanson(eps, grid);
  std::vector<std::pair<double, double>> s;
  auto& table = r.tables["mass"];
  for (double R : geometric_times(5.0 * eps, 0.5 * grid->r_max, 10)) {
    const double m = adm_mass(h, R);
    s.emplace_back(R, std::abs(m));
    table.push_back({{"R", R}, {"mass", m}});
  }
  const RateFit f = fit_power_law(s, false, 1e-300);
  r.fits = {{"abs_mass", f}};
  r.checks.push_back(check_le("|m(R)| exponent", f.exponent, -1.5));
  r.checks.push_back(check_le("|m(r_max/2)| / eps^2", std::abs(adm_mass(h, 0.5 * grid->r_max)) / (eps * eps), 1e-3));
  r.finish();
  return r;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"rates", "heat", "kernel", "flow", "picard", "psc", "check"};
  return names;
}

std::vector<CriterionResult> run_parallel(const std::vector<std::function<std::vector<CriterionResult>()>>& tasks,
                                          int jobs) {
  std::vector<std::vector<CriterionResult>> parts(tasks.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t lo = 0; lo < tasks.size(); lo += width) {
    const std::size_t hi = std::min(tasks.size(), lo + width);
    if (hi - lo == 1) {
      parts[lo] = tasks[lo]();
      continue;
    }
    std::vector<std::future<std::vector<CriterionResult>>> fs;
    for (std::size_t i = lo; i < hi; ++i) fs.push_back(std::async(std::launch::async, tasks[i]));
    for (std::size_t i = lo; i < hi; ++i) parts[i] = fs[i - lo].get();
  }
  std::vector<CriterionResult> out;
  for (auto& p : parts)
    for (auto& c : p) out.push_back(std::move(c));
  return out;
}

std::vector<CriterionResult> run_subcommand(const std::string& name, const Config& cfg, int jobs) {
  using Task = std::function<std::vector<CriterionResult>()>;
  auto one = [&cfg](CriterionResult (*f)(const Config&)) -> Task { return [f, &cfg] { return std::vector{f(cfg)}; }; };
  if (name == "rates") return run_parallel({one(rates_criterion)}, jobs);
  if (name == "heat") return run_parallel({one(heat_criterion)}, jobs);
  if (name == "kernel") return run_parallel({one(eh_ricci_criterion), one(kernel_criterion), one(adm_criterion)}, jobs);
  if (name == "flow") return stability_criteria(cfg);
  if (name == "picard") return run_parallel({one(picard_criterion)}, jobs);
  if (name == "psc") return run_parallel({one(psc_criterion)}, jobs);
  if (name == "check") return {property_suite(cfg, jobs)};
  throw ConfigError("unknown subcommand " + name);
}

}  // namespace alelab
