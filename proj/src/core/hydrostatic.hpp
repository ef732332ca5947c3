#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pressure.hpp"

namespace slabflow {

/// Static density profile rho_bar on [0,1]: solution of P'(rho) rho' = -rho
/// with rho(0) = rho_bottom, sampled at the n3+1 nodes z_k = k/n3.
struct HydrostaticProfile {
    double rho_bottom{0.0};
    int n3{0};
    std::vector<double> rho;  // n3+1 node samples
    double kappa{0.0};        // min over nodes

    double rho_wall_bottom() const { return rho.front(); }
    double rho_wall_top() const { return rho.back(); }
    double z(int k) const { return static_cast<double>(k) / n3; }
};

struct VerticalAverages {
    double avg_rho{0.0};           // <rho_bar>
    double avg_rho_over_dP{0.0};   // <rho_bar / P'(rho_bar)>
};

/// Integrates the static ODE with the classical 4-stage Runge-Kutta method,
/// step 1/n3. Throws if the profile hits kappa_min before the top wall.
HydrostaticProfile solve_profile(const PressureLaw& law, double rho_bottom, int n3,
                                 double kappa_min = 1e-10);

/// G = H'(rho_bar), node-wise.
std::vector<double> potential(const HydrostaticProfile& p, const PressureLaw& law);

/// Trapezoidal averages on the profile's own grid.
VerticalAverages vertical_averages(const HydrostaticProfile& p, const PressureLaw& law);

/// Closed form of the static profile for the monomial family:
/// gamma > 1: rho(z) = (rho0^{g-1} - z (g-1)/(a g))^{1/(g-1)},
/// gamma = 1: rho(z) = rho0 exp(-z/a).
double hydrostatic_closed_form(const PressureLaw& law, double rho_bottom, double z);

/// Max interior residual of the discrete ODE |P'(rho) D rho + rho| with
/// centered differences.
double profile_ode_residual(const HydrostaticProfile& p, const PressureLaw& law);

void write_profile_csv(const HydrostaticProfile& p, const PressureLaw& law,
                       const std::string& path);

}  // namespace slabflow
