#pragma once

#include <functional>

#include "field.hpp"
#include "spectral.hpp"

namespace slabflow {

/// Computable operator identities on the fully periodic 3D stack:
/// anisotropic Laplacian / Lame operator, Leray projectors, the density
/// commutator, the 2D Helmholtz decomposition, and the anisotropic Sobolev
/// ratio on the wall-bounded slab.

/// mu Delta_h f + eps d3^2 f, spectrally exact for band-limited f.
Field3D aniso_laplacian(const Spectral3D& sp, const Field3D& f, const ViscosityParams& p);
Field2D aniso_laplacian(const Spectral2D& sp, const Field2D& f, double mu);

/// L u = -Delta_{mu,eps} u - lambda grad(div u).
VectorField3D lame(const Spectral3D& sp, const VectorField3D& u, const ViscosityParams& p);

/// Leray projectors: Q = -grad (-Delta)^{-1} div, P = Id - Q; the mean mode
/// is assigned to P.
VectorField3D leray_Q(const Spectral3D& sp, const VectorField3D& u);
VectorField3D leray_P(const Spectral3D& sp, const VectorField3D& u);

/// Both evaluations of the commutator
///   C = -grad_{mu,eps} . ([1/rho_bar, P] grad_{mu,eps} h)
///     = (rho_bar'/rho_bar^2) (d3 (-Delta)^{-1} Delta_{mu,eps} h + eps d3 h),
/// computed independently for equality testing. rho_bar is a smooth periodic
/// vertical coefficient given with its derivative; it must stay >= kappa > 0.
struct CommutatorPair {
    VectorField3D lhs;  // from the commutator definition
    VectorField3D rhs;  // closed form
    double max_diff;
};
CommutatorPair commutator_C(const Spectral3D& sp, const VectorField3D& h,
                            const std::function<double(double)>& rho_bar,
                            const std::function<double(double)>& drho_bar,
                            const ViscosityParams& p, double kappa = 1e-8);

/// F = -grad_perp (-Delta)^{-1} a - grad (-Delta)^{-1} b, the unique periodic
/// field with curl F = a, div F = b. Both inputs must have zero mean.
VectorField2D helmholtz_2d(const Spectral2D& sp, const Field2D& a, const Field2D& b);

/// Norms entering the anisotropic Sobolev ratio
/// ||u||_L6 / (kappa^{-1/2} ||grad_h u||_L2 + kappa ||d3 u||_L2) for a field
/// vanishing at both walls (node levels, walls included). Horizontal
/// derivatives are spectral, vertical ones one-sided/centered 4th order;
/// norms use rectangle quadrature in x_h and trapezoid in x3. The norms do
/// not depend on kappa, so one evaluation serves a whole kappa sweep.
struct SobolevNorms {
    double l6{0.0};
    double grad_h_l2{0.0};
    double dz_l2{0.0};

    double ratio(double kappa) const;
    double optimal_kappa() const;  // argmax of ratio over kappa > 0
};
SobolevNorms aniso_sobolev_norms(const VectorField3D& u_nodes);
double aniso_sobolev_ratio(const VectorField3D& u_nodes, double kappa);

double linf_norm_2d(const Field2D& f);

/// Quadrature weights used across modules: rectangle in x_h, trapezoid in x3
/// over the explicit level set.
double integral_3d(const Field3D& f);              // integral of f
double l2_norm_3d(const Field3D& f);               // sqrt(integral f^2)
double lp_norm_3d(const Field3D& f, double pexp);  // (integral |f|^p)^{1/p}
double linf_norm_3d(const Field3D& f);

}  // namespace slabflow
