#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ekman.hpp"
#include "field.hpp"
#include "qg.hpp"
#include "spectral.hpp"
#include "static_state.hpp"

namespace slabflow {

/// QG parameters whose vertical averages are taken with the trapezoid rule on
/// the given level set, so that the vertical integral defining u_{1,3} closes
/// exactly at the top wall.
QGParams ansatz_qg_params(const StaticState& ss, const std::vector<double>& levels, int nh,
                          double lh, double mu, double dt);

/// The composite approximate solution (rho_app, u_app): static profile,
/// geostrophic interior, first-order correctors, both Ekman layers and the
/// linear-in-x3 lifts that keep the wall traces exactly zero. Carries the
/// analytic time derivative and the analytic first and second vertical
/// derivatives of every component, so residual evaluation never needs
/// finite differences in z or t.
class AnsatzBundle {
  public:
    /// levels: sorted, first = 0, last = 1. strict_band demands that the
    /// stream function have no content above nh/6, which keeps every
    /// quadratic product spectrally exact (required for residual scaling
    /// studies; initialization does not need it).
    AnsatzBundle(const StaticState& ss, const QGSolver& qg, double eps,
                 const std::vector<double>& levels, bool strict_band = true);

    double eps() const { return eps_; }
    double eps0() const { return eps0_; }
    double mu() const { return mu_; }
    int nh() const { return nh_; }
    double lh() const { return lh_; }
    const std::vector<double>& levels() const { return z_; }
    const StaticState::Samples& profiles() const { return prof_; }
    const StaticState& static_state() const { return ss_; }

    const Field3D& rho() const { return rho_; }
    const Field3D& rho_t() const { return rho_t_; }
    const Field3D& rho_z() const { return rho_z_; }
    const VectorField3D& u() const { return u_; }
    const VectorField3D& u_t() const { return u_t_; }
    const VectorField3D& u_z() const { return u_z_; }
    const VectorField3D& u_zz() const { return u_zz_; }
    const Field3D& u13() const { return u13_; }

    /// rho_1 = Q rho_bar / P'(rho_bar) and rho_2 = Q^2 psi as 3D fields.
    Field3D rho1() const;
    Field3D rho2() const;

    /// max_z deviation of (P'(rho_bar)/rho_bar) rho_1 from its own vertical
    /// mean, evaluated discretely (the quantity is Q, independent of x3).
    double qindepx3_residual() const;

    /// Discrete geostrophic balance residual of (r_in, u_in) = (rho1, u0):
    /// horizontal part exact by construction, vertical via 4th-order FD.
    double wellpre_residual() const;

    /// Residual of the first-order interior mass balance
    /// d_t rho1 + div(rho_bar u_1) + div_h(rho1 u0), evaluated with the
    /// analytic vertical derivative of rho_bar u_{1,3}.
    double interior_mass_residual() const;

    // internals shared with the residual evaluator
    struct Horizontal;
    const Horizontal& horizontal() const { return *h2d_; }
    const Spectral2D& spectral() const { return *spp_; }

    ~AnsatzBundle();
    AnsatzBundle(AnsatzBundle&&) noexcept;

  private:
    StaticState ss_;
    double eps_;
    double eps0_{0.0};
    double mu_;
    int nh_;
    double lh_;
    std::vector<double> z_;
    std::unique_ptr<Spectral2D> spp_;
    StaticState::Samples prof_;
    std::vector<double> cum_g_, cum_rho_, cum_rhoc4_;  // cumulative trapezoids

    Field3D rho_, rho_t_, rho_z_;
    VectorField3D u_, u_t_, u_z_, u_zz_;
    Field3D u13_, u13_t_;
    std::unique_ptr<Horizontal> h2d_;

    friend struct AnsatzResidualEval;
};

/// Residual of the scaled rotating system evaluated on the bundle, split into
/// the known boundary-layer forcings and the higher-order leftover.
struct AnsatzResidual {
    Field3D mass_res;            // d_t rho + div(rho u)
    Field3D mass_leftover;       // mass_res - eps R_bl      (O(eps^2))
    VectorField3D mom_res;       // full momentum residual
    VectorField3D mom_leftover;  // mom_res - TaylorCoriolis - S_bl  (O(eps))
    VectorField3D s_bl;
    Field3D r_bl;

    double sbl_l2{0.0};
    double mass_res_l2{0.0}, mass_res_linf{0.0};
    double mass_left_l2{0.0}, mass_left_linf{0.0};
    double mom_res_l2{0.0}, mom_res_linf{0.0};
    double mom_left_l2{0.0}, mom_left_linf{0.0};
};

AnsatzResidual ansatz_residual(const AnsatzBundle& b, const ViscosityParams& visc);

}  // namespace slabflow
