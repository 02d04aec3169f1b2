#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alelab/geometry.hpp"

namespace alelab {

struct Snapshot {
  double t = 0.0;
  CohomMetric g;
  std::optional<CohomMetric> h;        // gauge point Phi(g)
  std::optional<InvariantTensor> k;    // g - h, frame of h
  std::optional<InvariantTensor> dh_dt;  // frame of h
  double eps = 0.0;
};

struct DiagnosticsRow {
  double t = 0.0;
  double L2_k = 0.0, L4_k = 0.0, Linf_k = 0.0, W12_k = 0.0;
  double V_C0 = 0.0, Ric_C0 = 0.0;
  double scal_min = 0.0, scal_max = 0.0;
  double eps = 0.0;
  double residual = 0.0;
};

struct Trajectory {
  CohomMetric background;  // fixed reference for norms
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRow> rows;
};

/// Header: t,L2_k,L4_k,Linf_k,W12_k,V_C0,Ric_C0,scal_min,scal_max,eps,residual
/// A non-empty `comment` is written first as a "# ..." line.
void write_trajectory_csv(const Trajectory& traj, const std::string& path, const std::string& comment = "");

}  // namespace alelab
