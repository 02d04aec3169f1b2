#pragma once

// Brute-force Ricci tensor of  A du^2 + sum_i B_i alpha_i^2  in Euler-angle coordinates,
// by nested central differences of the coordinate metric. Test-only.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace oracle {

using Fn = std::function<double(double)>;
using M4 = Eigen::Matrix4d;
using V4 = Eigen::Vector4d;

struct Ansatz {
  Fn A, B1, B2, B3;
};

// alpha_i = sigma_i / 2 with the standard left-invariant forms in (theta, phi, psi).
inline Eigen::Matrix<double, 3, 4> alpha(const V4& x) {
  const double th = x[1], ps = x[3];
  Eigen::Matrix<double, 3, 4> a = Eigen::Matrix<double, 3, 4>::Zero();
  a.row(0) << 0, 0, std::cos(th), 1;
  a.row(1) << 0, std::sin(ps), -std::sin(th) * std::cos(ps), 0;
  a.row(2) << 0, std::cos(ps), std::sin(th) * std::sin(ps), 0;
  return 0.5 * a;
}

inline M4 coframe(const Ansatz& m, const V4& x) {
  M4 c = M4::Zero();
  c(0, 0) = std::sqrt(m.A(x[0]));
  const auto a = alpha(x);
  c.row(1) = std::sqrt(m.B1(x[0])) * a.row(0);
  c.row(2) = std::sqrt(m.B2(x[0])) * a.row(1);
  c.row(3) = std::sqrt(m.B3(x[0])) * a.row(2);
  return c;
}

inline M4 metric(const Ansatz& m, const V4& x) {
  const M4 c = coframe(m, x);
  return c.transpose() * c;
}

// Gamma^k_ij stored as G[k](i,j).
inline std::array<M4, 4> christoffel(const Ansatz& m, const V4& x, double h) {
  std::array<M4, 4> dg;
  for (int l = 0; l < 4; ++l) {
    V4 e = V4::Zero();
    e[l] = h;
    dg[l] = (metric(m, x + e) - metric(m, x - e)) / (2 * h);
  }
  const M4 gi = metric(m, x).inverse();
  std::array<M4, 4> G;
  for (int k = 0; k < 4; ++k) {
    G[k].setZero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int l = 0; l < 4; ++l)
          G[k](i, j) += 0.5 * gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  }
  return G;
}

// Ricci in the orthonormal frame dual to (sqrt A du, sqrt B_i alpha_i).
inline M4 frame_ricci(const Ansatz& m, const V4& x, double h1 = 1e-5, double h2 = 1e-4) {
  const auto G = christoffel(m, x, h1);
  std::array<std::array<M4, 4>, 4> dG;  // dG[l][k] = d_l Gamma^k
  for (int l = 0; l < 4; ++l) {
    V4 e = V4::Zero();
    e[l] = h2;
    const auto Gp = christoffel(m, x + e, h1), Gm = christoffel(m, x - e, h1);
    for (int k = 0; k < 4; ++k) dG[l][k] = (Gp[k] - Gm[k]) / (2 * h2);
  }
  M4 R = M4::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) {
        s += dG[k][k](i, j) - dG[j][k](i, k);
        for (int l = 0; l < 4; ++l) s += G[k](k, l) * G[l](i, j) - G[k](j, l) * G[l](i, k);
      }
      R(i, j) = s;
    }
  const M4 frame = coframe(m, x).inverse();  // columns are frame vectors
  return frame.transpose() * R * frame;
}

}  // namespace oracle
