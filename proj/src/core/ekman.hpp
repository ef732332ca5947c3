#pragma once

#include <vector>

#include "field.hpp"

namespace slabflow {

enum class LayerSide { bottom, top };

/// One Ekman layer at a horizontal wall. The stretched coordinate is
/// zeta = x3/eps at the bottom wall and eta = (1-x3)/eps at the top wall;
/// all profiles below are functions of that nonnegative coordinate.
struct EkmanLayer {
    double rho_wall;  // rho_bar at the wall
    LayerSide side;
    double k;         // decay rate sqrt(rho_wall/2)

    EkmanLayer(double rho_wall_, LayerSide side_);
};

/// Horizontal spiral profile -e^{-k z} R(-k z) u0h, the decaying solution of
/// rho_wall (u)^perp = u'' with value -u0h at the wall.
Vec2 spiral_profile(const EkmanLayer& l, Vec2 u0h, double zeta);
Vec2 spiral_profile_d1(const EkmanLayer& l, Vec2 u0h, double zeta);
Vec2 spiral_profile_d2(const EkmanLayer& l, Vec2 u0h, double zeta);

/// Max |rho_wall (u)^perp - u''| over the grid, with analytic second
/// derivatives. phase_scale != 1 detunes the spiral's rotation rate, turning
/// the profile into a non-solution (used to confirm the residual detects one).
double spiral_ode_residual(const EkmanLayer& l, Vec2 u0h, const std::vector<double>& zeta_grid,
                           double phase_scale = 1.0);

/// First-order vertical corrector (value of u1,3^bl):
/// bottom: -(e^{-k z}/sqrt(2 rho_wall)) (cos k z + sin k z) omega0, top has
/// the opposite sign. Satisfies div_h u0h^bl + d/dzeta u13^bl = 0.
double vertical_corrector(const EkmanLayer& l, double omega0, double zeta);
double vertical_corrector_d1(const EkmanLayer& l, double omega0, double zeta);
double vertical_corrector_d2(const EkmanLayer& l, double omega0, double zeta);

/// Ekman pumping coefficient (sqrt(rho_bar(0)) + sqrt(rho_bar(1)))/sqrt(2).
double pumping_coefficient(double rho_bottom_wall, double rho_top_wall);

/// First-order horizontal layer -u1_wall e^{-k z}.
Vec2 corrector_layer_u1(const EkmanLayer& l, Vec2 u1_wall, double zeta);
Vec2 corrector_layer_u1_d1(const EkmanLayer& l, Vec2 u1_wall, double zeta);
Vec2 corrector_layer_u1_d2(const EkmanLayer& l, Vec2 u1_wall, double zeta);

}  // namespace slabflow
