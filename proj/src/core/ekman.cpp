#include "ekman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slabflow {

EkmanLayer::EkmanLayer(double rho_wall_, LayerSide side_)
    : rho_wall(rho_wall_), side(side_), k(std::sqrt(rho_wall_ / 2.0)) {
    if (!(rho_wall > 0.0)) throw std::domain_error("EkmanLayer: wall density must be > 0");
}

namespace {
void check_zeta(double zeta) {
    if (zeta < 0.0) throw std::domain_error("Ekman profile: stretched coordinate must be >= 0");
}
inline Vec2 tilde(Vec2 u) { return {u.y, -u.x}; }
}  // namespace

Vec2 spiral_profile(const EkmanLayer& l, Vec2 u0h, double zeta) {
    check_zeta(zeta);
    const double th = l.k * zeta, e = std::exp(-th), c = std::cos(th), s = std::sin(th);
    return -e * (c * u0h + s * tilde(u0h));
}

Vec2 spiral_profile_d1(const EkmanLayer& l, Vec2 u0h, double zeta) {
    check_zeta(zeta);
    const double th = l.k * zeta, e = std::exp(-th), c = std::cos(th), s = std::sin(th);
    return (l.k * e) * ((c + s) * u0h + (s - c) * tilde(u0h));
}

Vec2 spiral_profile_d2(const EkmanLayer& l, Vec2 u0h, double zeta) {
    check_zeta(zeta);
    const double th = l.k * zeta, e = std::exp(-th), c = std::cos(th), s = std::sin(th);
    return (l.rho_wall * e) * (-s * u0h + c * tilde(u0h));
}

double spiral_ode_residual(const EkmanLayer& l, Vec2 u0h, const std::vector<double>& zeta_grid,
                           double phase_scale) {
    double worst = 0.0;
    const double p = phase_scale, k = l.k;
    for (double zeta : zeta_grid) {
        check_zeta(zeta);
        const double e = std::exp(-k * zeta);
        const double c = std::cos(p * k * zeta), s = std::sin(p * k * zeta);
        const Vec2 u = -e * (c * u0h + s * tilde(u0h));
        const Vec2 upp = e * ((p * p - 1.0) * k * k * c - 2.0 * p * k * k * s) * u0h +
                         e * ((p * p - 1.0) * k * k * s + 2.0 * p * k * k * c) * tilde(u0h);
        const Vec2 res = l.rho_wall * u.perp() - upp;
        worst = std::max(worst, std::max(std::abs(res.x), std::abs(res.y)));
    }
    return worst;
}

double vertical_corrector(const EkmanLayer& l, double omega0, double zeta) {
    check_zeta(zeta);
    const double th = l.k * zeta, e = std::exp(-th), c = std::cos(th), s = std::sin(th);
    const double sign = (l.side == LayerSide::bottom) ? -1.0 : 1.0;
    return sign * omega0 * e * (c + s) / std::sqrt(2.0 * l.rho_wall);
}

double vertical_corrector_d1(const EkmanLayer& l, double omega0, double zeta) {
    check_zeta(zeta);
    const double th = l.k * zeta, e = std::exp(-th), s = std::sin(th);
    const double sign = (l.side == LayerSide::bottom) ? -1.0 : 1.0;
    return -2.0 * sign * omega0 * l.k * e * s / std::sqrt(2.0 * l.rho_wall);
}

double vertical_corrector_d2(const EkmanLayer& l, double omega0, double zeta) {
    check_zeta(zeta);
    const double th = l.k * zeta, e = std::exp(-th), c = std::cos(th), s = std::sin(th);
    const double sign = (l.side == LayerSide::bottom) ? -1.0 : 1.0;
    return -2.0 * sign * omega0 * l.k * l.k * e * (c - s) / std::sqrt(2.0 * l.rho_wall);
}

double pumping_coefficient(double rho_bottom_wall, double rho_top_wall) {
    if (!(rho_bottom_wall > 0.0) || !(rho_top_wall > 0.0))
        throw std::domain_error("pumping_coefficient: wall densities must be > 0");
    return (std::sqrt(rho_bottom_wall) + std::sqrt(rho_top_wall)) / std::sqrt(2.0);
}

Vec2 corrector_layer_u1(const EkmanLayer& l, Vec2 u1_wall, double zeta) {
    check_zeta(zeta);
    return -std::exp(-l.k * zeta) * u1_wall;
}

Vec2 corrector_layer_u1_d1(const EkmanLayer& l, Vec2 u1_wall, double zeta) {
    check_zeta(zeta);
    return (l.k * std::exp(-l.k * zeta)) * u1_wall;
}

Vec2 corrector_layer_u1_d2(const EkmanLayer& l, Vec2 u1_wall, double zeta) {
    check_zeta(zeta);
    return (-l.k * l.k * std::exp(-l.k * zeta)) * u1_wall;
}

}  // namespace slabflow
