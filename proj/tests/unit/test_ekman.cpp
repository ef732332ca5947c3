#include <doctest.h>

#include <cmath>
#include <random>

#include "ekman.hpp"
#include "spectral.hpp"

using namespace slabflow;

namespace {
std::vector<double> uniform_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}
}  // namespace

TEST_SUITE("ekman") {
    TEST_CASE("no-slip closure at the wall") {
        for (auto side : {LayerSide::bottom, LayerSide::top}) {
            EkmanLayer l(1.7, side);
            const Vec2 u{0.3, -1.2};
            const Vec2 v = spiral_profile(l, u, 0.0);
            CHECK(v.x == doctest::Approx(-u.x).epsilon(1e-15));
            CHECK(v.y == doctest::Approx(-u.y).epsilon(1e-15));
        }
    }

    TEST_CASE("spiral value at zeta = pi for rho_wall = 2") {
        EkmanLayer l(2.0, LayerSide::bottom);
        CHECK(l.k == doctest::Approx(1.0).epsilon(1e-15));
        const Vec2 v = spiral_profile(l, {1.0, 0.0}, std::numbers::pi);
        CHECK(v.x == doctest::Approx(std::exp(-std::numbers::pi)).epsilon(1e-13));
        CHECK(std::abs(v.y) <= 1e-15);
    }

    TEST_CASE("exponential envelope") {
        EkmanLayer l(2.0, LayerSide::bottom);
        const Vec2 u{0.7, 0.4};
        for (double z : {1.0, 5.0, 20.0}) {
            const Vec2 v = spiral_profile(l, u, z);
            CHECK(v.norm() <= std::exp(-l.k * z) * u.norm() * (1.0 + 1e-13));
        }
        CHECK_THROWS_AS(spiral_profile(l, u, -0.1), std::domain_error);
    }

    TEST_CASE("layer ODE residual: closed form exact, detuned profile detected") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        const auto grid = uniform_grid(0.0, 10.0, 2001);
        for (int trial = 0; trial < 20; ++trial) {
            EkmanLayer l(0.5 + 0.2 * trial, LayerSide::bottom);
            const Vec2 u{d(rng), d(rng)};
            CHECK(spiral_ode_residual(l, u, grid) <= 1e-12);
        }
        EkmanLayer l(2.0, LayerSide::bottom);
        const double detuned = spiral_ode_residual(l, {1.0, 0.0}, grid, 1.01);
        CHECK(detuned > 1e-4);
        CHECK(detuned < 1.0);
        CHECK(spiral_ode_residual(l, {0.0, 0.0}, grid) == 0.0);
    }

    TEST_CASE("vertical corrector wall values") {
        EkmanLayer b(2.0, LayerSide::bottom);
        CHECK(vertical_corrector(b, 1.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-15));
        CHECK(vertical_corrector(b, 0.0, 3.0) == 0.0);
        EkmanLayer t(2.0, LayerSide::top);
        CHECK(vertical_corrector(t, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    }

    TEST_CASE("divergence relation div_h u0bl + d/dzeta u13bl = 0") {
        // random divergence-free horizontal velocity from a stream function,
        // spectral horizontal divergence vs analytic zeta-derivative.
        const int n = 32;
        const double lh = 2.0 * std::numbers::pi;
        Spectral2D sp(n, lh);
        Field2D psi(n, lh);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (auto& v : psi.data()) v = d(rng);
        // smooth it: keep a low band
        std::vector<cplx> ph;
        sp.forward(psi, ph);
        for (int j = 0; j < n; ++j) {
            const int mj = (j <= n / 2) ? j : j - n;
            for (int i = 0; i < sp.nkx(); ++i)
                if (i > 5 || std::abs(mj) > 5) ph[sp.sidx(i, j)] = 0.0;
        }
        sp.inverse(ph, psi);
        const VectorField2D u0 = sp.gradient_perp(psi);
        const Field2D omega = sp.laplacian(psi);

        // bottom: div_h u0bl + d/dzeta u13bl = 0; top: the physical vertical
        // derivative is -d/deta, so div_h u0bl - d/deta u13bl = 0.
        for (auto side : {LayerSide::bottom, LayerSide::top}) {
            EkmanLayer l(side == LayerSide::bottom ? 2.0 : 1.5, side);
            const double chain = (side == LayerSide::bottom) ? 1.0 : -1.0;
            for (double zeta : uniform_grid(0.0, 10.0, 21)) {
                // spiral field at this level
                Field2D s1(n, lh), s2(n, lh);
                for (int m = 0; m < n * n; ++m) {
                    const Vec2 v = spiral_profile(
                        l, {u0[0].data()[m], u0[1].data()[m]}, zeta);
                    s1.data()[m] = v.x;
                    s2.data()[m] = v.y;
                }
                const Field2D d1 = sp.ddx(s1), d2 = sp.ddy(s2);
                for (int m = 0; m < n * n; ++m) {
                    const double div_h = d1.data()[m] + d2.data()[m];
                    const double dz = vertical_corrector_d1(l, omega.data()[m], zeta);
                    CHECK(std::abs(div_h + chain * dz) <= 1e-10);
                }
            }
        }
    }

    TEST_CASE("pumping coefficient values and flux identity") {
        CHECK(pumping_coefficient(1.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
        CHECK(pumping_coefficient(2.0, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK_THROWS_AS(pumping_coefficient(-1.0, 1.0), std::domain_error);

        // -rho(1) u13_t(0) + rho(0) u13_b(0) = -coef * omega0, both routes
        const double r0 = 2.0, r1 = 1.5, omega0 = 0.8;
        EkmanLayer b(r0, LayerSide::bottom), t(r1, LayerSide::top);
        const double flux = -r1 * vertical_corrector(t, omega0, 0.0) +
                            r0 * vertical_corrector(b, omega0, 0.0);
        CHECK(std::abs(flux + pumping_coefficient(r0, r1) * omega0) <= 1e-12);
    }

    TEST_CASE("first-order layer corrector") {
        EkmanLayer l(2.0, LayerSide::bottom);
        const Vec2 u1{0.4, -0.9};
        Vec2 v = corrector_layer_u1(l, u1, 0.0);
        CHECK(v.x == doctest::Approx(-u1.x).epsilon(1e-15));
        CHECK(v.y == doctest::Approx(-u1.y).epsilon(1e-15));
        v = corrector_layer_u1(l, u1, 1.0 / l.k);
        CHECK(v.x == doctest::Approx(-u1.x / std::numbers::e).epsilon(1e-13));
        for (double z : uniform_grid(0.0, 8.0, 33))
            CHECK(corrector_layer_u1(l, u1, z).norm() <=
                  u1.norm() * std::exp(-l.k * z) * (1.0 + 1e-13));
    }

    TEST_CASE("Hardy-weighted decay of the spiral") {
        EkmanLayer l(2.0, LayerSide::bottom);
        const Vec2 u{1.0, -0.5};
        double sup = 0.0;
        for (double z : uniform_grid(0.0, 40.0, 40001))
            sup = std::max(sup, z * z * spiral_profile(l, u, z).norm());
        const double bound = std::pow(2.0 / (l.k * std::numbers::e), 2.0) * u.norm();
        CHECK(sup <= bound * (1.0 + 1e-10));
        CHECK(sup > 0.9 * bound);  // the bound is attained at zeta = 2/k
    }
}
