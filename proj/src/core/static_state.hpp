#pragma once

#include <vector>

#include "pressure.hpp"

namespace slabflow {

/// Closed-form static state rho_bar for a monomial law, with the derived
/// vertical profiles the asymptotic expansion needs:
///   g    = rho_bar / P'(rho_bar)        (the rho_1 shape)
///   psi  = rho_2 shape, solving psi' + (dP'(rho_bar)+1)/P' psi = rhs
///   c4   = (P' psi + P'' g^2 / 2) / rho_bar
/// All first and second z-derivatives are obtained from the static ODE
/// rho_bar' = -rho_bar / P'(rho_bar), never from finite differences.
class StaticState {
  public:
    StaticState(const PressureLaw& law, double rho_bottom);

    const PressureLaw& law() const { return law_; }
    double rho_bottom() const { return rho_bottom_; }

    double rho(double z) const;
    double drho(double z) const;
    double d2rho(double z) const;

    double g(double z) const;
    double dg(double z) const;
    double d2g(double z) const;

    double inv_dP(double z) const;    // 1 / P'(rho_bar)
    double dinv_dP(double z) const;
    double d2inv_dP(double z) const;

    // rho_2 shape ODE right-hand side machinery (z-dependent only)
    double psi_rhs(double z) const;
    double psi_coef(double z) const;  // (d3 P'(rho_bar) + 1) / P'(rho_bar)

    /// Samples of one profile and its two derivatives on a z-level set.
    struct Profile {
        std::vector<double> v, d1, d2;
    };

    /// All profiles sampled on the given levels. psi is integrated from 0 by
    /// RK4 with internal substeps; the levels must be sorted, in [0, 1].
    struct Samples {
        Profile rho, g, inv_rho, inv_dP, c4, psi;
        std::vector<double> z;
    };
    Samples sample(const std::vector<double>& levels) const;

  private:
    double psi_value(double z) const;  // single-point integration (slow path)
    PressureLaw law_;
    double rho_bottom_;
};

}  // namespace slabflow
