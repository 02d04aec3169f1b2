#include "alelab/norms.hpp"

#include <cmath>
#include <sstream>

#include "alelab/errors.hpp"
#include "alelab/trajectory.hpp"

namespace alelab {

std::string NormSpec::describe() const {
  std::ostringstream os;
  auto num = [](double v) {
    std::ostringstream s;
    if (std::isinf(v)) s << "inf"; else s << v;
    return s.str();
  };
  switch (kind) {
    case NormKind::Lp: os << "L" << num(p); break;
    case NormKind::Wkp: os << "W" << k << "," << num(p); break;
    case NormKind::WeightedWkp: os << "W" << k << "," << num(p) << "_delta" << delta; break;
    case NormKind::X: os << "X_" << num(q) << "," << num(r); break;
    case NormKind::Z: os << "Z_" << num(q) << "," << num(r); break;
    case NormKind::Y: os << "Y_" << num(q) << "," << num(r); break;
  }
  return os.str();
}

void validate(const NormSpec& s) {
  switch (s.kind) {
    case NormKind::Lp:
    case NormKind::Wkp:
    case NormKind::WeightedWkp:
      if (!(s.p > 1.0)) throw ConfigError("norm: p must lie in (1, inf]");
      if (s.k < 0 || s.k > 2) throw ConfigError("norm: derivative order must be 0, 1 or 2");
      break;
    case NormKind::X:
    case NormKind::Z:
    case NormKind::Y: {
      const double n = s.dim;
      if (!(s.q > 1.0 && s.q < n)) throw ConfigError("norm: q must lie in (1, n)");
      if (!(s.r > n) || std::isinf(s.r)) throw ConfigError("norm: r must lie in (n, inf)");
      if (!(0.5 * n * (1.0 / s.q - 1.0 / s.r) > 0.5))
        throw ConfigError("norm: need n/2 (1/q - 1/r) > 1/2");
      break;
    }
  }
}

double lp_of_pointwise(const Vec& f, double p, const CohomMetric& metric) {
  if (std::isinf(p)) return f.abs().maxCoeff();
  const Vec vol = volume_density(metric);
  return std::pow(integrate(f.abs().pow(p), vol, *metric.grid), 1.0 / p);
}

std::vector<Vec> derivative_norms(const InvariantTensor& k, const CohomMetric& metric, int order) {
  require_frame(k, metric, "derivative_norms");
  std::vector<Vec> out;
  TensorField T = as_tensor_field(k);
  out.push_back(pointwise_norm(T));
  if (order == 0) return out;
  const FrameGeometry fg = frame_geometry(metric);
  for (int j = 1; j <= order; ++j) {
    T = covariant_derivative(metric, fg, T);
    out.push_back(pointwise_norm(T));
  }
  return out;
}

namespace {

double weighted_sum(const std::vector<Vec>& dn, const NormSpec& spec, const CohomMetric& metric) {
  const int order = spec.kind == NormKind::Lp ? 0 : spec.k;
  double total = 0.0;
  if (spec.kind != NormKind::WeightedWkp) {
    for (int j = 0; j <= order; ++j) total += lp_of_pointwise(dn[j], spec.p, metric);
    return total;
  }
  const Vec rho = (1.0 + metric.nodes().square()).sqrt();
  const double n = 4.0;
  for (int j = 0; j <= order; ++j) {
    const Vec f = rho.pow(j) * dn[j];
    if (std::isinf(spec.p)) {
      total += (f * rho.pow(-spec.delta)).maxCoeff();
    } else {
      const Vec w = volume_density(metric) * rho.pow(-spec.delta * spec.p - n);
      total += std::pow(integrate(f.pow(spec.p), w, *metric.grid), 1.0 / spec.p);
    }
  }
  return total;
}

}  // namespace

double norm(const InvariantTensor& k, const NormSpec& spec, const CohomMetric& metric) {
  validate(spec);
  if (spec.kind == NormKind::X || spec.kind == NormKind::Z || spec.kind == NormKind::Y)
    throw ConfigError("norm: trajectory norms need trajectory_norms");
  const int order = spec.kind == NormKind::Lp ? 0 : spec.k;
  return weighted_sum(derivative_norms(k, metric, order), spec, metric);
}

double norm(const Vec& f, const NormSpec& spec, const CohomMetric& metric) {
  validate(spec);
  const int order = spec.kind == NormKind::Lp ? 0 : spec.k;
  std::vector<Vec> dn{f.abs()};
  const Vec N = metric.comps.col(0).sqrt();
  if (order >= 1) dn.push_back((derivative(f, 1, *metric.grid, Parity::Even) / N).abs());
  if (order >= 2) {
    // |Hess f|^2 = (E0E0 f)^2 + sum_i (s_i E0 f)^2
    const FrameGeometry fg = frame_geometry(metric);
    const Vec d1 = derivative(f, 1, *metric.grid, Parity::Even);
    const Vec d2 = derivative(f, 2, *metric.grid, Parity::Even);
    const Vec e0 = d1 / N;
    Vec h2 = ((d2 - 0.5 * fg.dlnA * d1) / fg.A).square();
    for (int i = 0; i < 3; ++i) h2 += (fg.s.col(i) * e0).square();
    Vec hn = h2.sqrt();
    close_at_bolt(hn, *metric.grid, Parity::Even);
    dn.push_back(hn);
  }
  return weighted_sum(dn, spec, metric);
}

TrajectoryNorms trajectory_norms(const Trajectory& traj, double q, double r) {
  NormSpec spec;
  spec.kind = NormKind::Y;
  spec.q = q;
  spec.r = r;
  validate(spec);
  const double n = 4.0;
  const double beta = std::min(1.0, 0.5 * n * (1.0 / q - 1.0 / r));
  const double zeta = n * (1.0 / q - 1.0 / r);
  const CohomMetric& bg = traj.background;

  TrajectoryNorms out;
  out.x.spec = "X_" + std::to_string(q) + "," + std::to_string(r);
  out.z.spec = "Z_" + std::to_string(q) + "," + std::to_string(r);
  out.y.spec = "Y_" + std::to_string(q) + "," + std::to_string(r);
  NormReport tk{"L" + std::to_string(q) + "_k", 0, 0}, tdk{"t^1/2 L" + std::to_string(q) + "_grad_k", 0, 0};
  NormReport td2{"t^beta (L" + std::to_string(q) + "_hess_k + W2," + std::to_string(r) + "_k)", 0, 0};
  NormReport th{"L" + std::to_string(q) + "_h", 0, 0}, tdh{"t^zeta L" + std::to_string(q) + "_dt_h", 0, 0};

  for (const auto& snap : traj.snapshots) {
    if (snap.t < 1.0 || !snap.k) continue;
    const double t = snap.t;
    const InvariantTensor k = reframe(*snap.k, *snap.h, bg);
    const auto dn = derivative_norms(k, bg, 2);
    const double a = lp_of_pointwise(dn[0], q, bg);
    const double b = std::sqrt(t) * lp_of_pointwise(dn[1], q, bg);
    const double w2r = lp_of_pointwise(dn[0], r, bg) + lp_of_pointwise(dn[1], r, bg) + lp_of_pointwise(dn[2], r, bg);
    const double c = std::pow(t, beta) * (lp_of_pointwise(dn[2], q, bg) + w2r);
    const double xv = a + b + c;
    auto upd = [t](NormReport& rep, double v) {
      if (v > rep.value) {
        rep.value = v;
        rep.argmax_time = t;
      }
    };
    upd(tk, a);
    upd(tdk, b);
    upd(td2, c);
    upd(out.x, xv);

    const InvariantTensor dh = difference(*snap.h, bg);
    const double hz = lp_of_pointwise(derivative_norms(dh, bg, 0)[0], q, bg);
    double dz = 0.0;
    if (snap.dh_dt) dz = std::pow(t, zeta) * lp_of_pointwise(derivative_norms(reframe(*snap.dh_dt, *snap.h, bg), bg, 0)[0], q, bg);
    upd(th, hz);
    upd(tdh, dz);
    upd(out.z, hz + dz);
  }
  out.y.value = out.x.value + out.z.value;
  out.y.argmax_time = out.x.value >= out.z.value ? out.x.argmax_time : out.z.argmax_time;
  out.terms = {tk, tdk, td2, th, tdh};
  return out;
}

PredictedExponent predicted_exponent(int n, double p, double q, int i, double slack) {
  if (!(p > 1.0) || !(q >= p) || i < 0) throw DomainError("predicted_exponent: need 1 < p <= q, i >= 0");
  const double a = 0.5 * n * (1.0 / p - 1.0 / q) + 0.5 * i;
  const double cap = n / (2.0 * p);
  if (a < cap) return {-a, false};
  return {-cap + slack, true};
}

}  // namespace alelab
