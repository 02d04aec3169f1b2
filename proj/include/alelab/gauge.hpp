#pragma once

#include <vector>

#include "alelab/geometry.hpp"
#include "alelab/operators.hpp"

namespace alelab {

struct KernelBasis {
  std::vector<InvariantTensor> elements;  // L^2(h)-orthonormal, frame of the base metric
  double base_eps = 0.0;
  double residual = 0.0;  // max_i |Delta_L e_i|_{L^2} / |e_i|_{W^{2,2}}
};

/// Kernel of Delta_L on EH_eps (own geodesic chart), built from the eps-derivative of
/// the family with its gauge part removed: e = d_eps g + L_X g with DV(e) = 0, X(0) = 0.
/// Cached per (grid, eps). Throws KernelConstructionError above `tol`.
KernelBasis kernel_basis(double eps, GridPtr grid, double tol = 1e-3);

/// Normalised kernel element of a family member h = eh_family(eps, chart), closed form.
InvariantTensor kernel_element(const CohomMetric& h);
KernelBasis kernel_basis_of(const CohomMetric& h);

enum class Projection { Parallel, Perp };

InvariantTensor project(const CohomMetric& h, const KernelBasis& basis, const InvariantTensor& k, Projection mode);

/// Pi_perp_{h,hbar}: ker(h)^perp -> ker(hbar)^perp, k -> Pi_perp_hbar k. Output in the frame of hbar.
InvariantTensor transfer(const CohomMetric& h, const CohomMetric& h_bar, const KernelBasis& basis_hbar,
                         const InvariantTensor& k);

/// (Pi_perp_{h,hbar})^{-1} = id - (Pi_par_{hbar,h})^{-1} Pi_par_h, for any kernel dimension.
/// k_bar in the frame of hbar; output in the frame of h.
InvariantTensor transfer_inverse(const CohomMetric& h, const CohomMetric& h_bar, const KernelBasis& basis_h,
                                 const KernelBasis& basis_hbar, const InvariantTensor& k_bar);

/// One-dimensional kernel: k_bar - <k_bar, e>_h / <e_bar, e>_h e_bar.
InvariantTensor transfer_inverse_direct(const CohomMetric& h, const CohomMetric& h_bar, const InvariantTensor& e,
                                        const InvariantTensor& e_bar, const InvariantTensor& k_bar);

struct ModuliPoint {
  CohomMetric h;
  double eps = 0.0;
};

struct ProjectionOptions {
  double lo = 0.0, hi = 0.0;  // bracket; 0 -> [eps0/2, 2 eps0]
  int scan_points = 48;
  double max_distance = 0.2;  // L^inf frame distance allowed for g - h
};

struct ProjectionResult {
  ModuliPoint point;
  InvariantTensor k;           // g - h, frame of h
  double orthogonality = 0.0;  // |<k,e>| / (|k| |e|)
};

/// Phi(g): the family member h_eps (chart of g) with g - h_eps L^2(h_eps)-orthogonal to its kernel.
ProjectionResult moduli_projection(const CohomMetric& g, const ProjectionOptions& options = {});

/// F(eps) = <g - h_eps, e(eps)>_{L^2(h_eps)}.
double projection_residual(const CohomMetric& g, double eps);

/// D eps(X) at g, X in the frame of Phi(g).
double moduli_eps_derivative(const CohomMetric& g, const ModuliPoint& at, const InvariantTensor& X);
/// D_g Phi(X) = d_eps h * D eps(X), frame of Phi(g).
InvariantTensor moduli_derivative(const CohomMetric& g, const ModuliPoint& at, const InvariantTensor& X);

}  // namespace alelab
