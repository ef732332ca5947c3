#include <doctest.h>

#include <cmath>

#include "hydrostatic.hpp"

using namespace slabflow;

TEST_SUITE("hydrostatic") {
    TEST_CASE("gamma=2 profile is linear") {
        PressureLaw law(2.0, 1.0);
        auto p = solve_profile(law, 2.0, 64);
        for (int k = 0; k <= p.n3; ++k)
            CHECK(p.rho[k] == doctest::Approx(2.0 - 0.5 * p.z(k)).epsilon(1e-13));
        CHECK(p.rho_wall_top() == doctest::Approx(1.5).epsilon(1e-13));
        auto va = vertical_averages(p, law);
        CHECK(va.avg_rho == doctest::Approx(1.75).epsilon(1e-13));
    }

    TEST_CASE("potential differences reproduce gravity") {
        PressureLaw law(2.0, 1.0);
        auto p = solve_profile(law, 2.0, 64);
        auto g = potential(p, law);
        for (int k = 0; k <= p.n3; ++k)
            CHECK(g[k] - g[0] == doctest::Approx(-p.z(k)).epsilon(1e-12));
    }

    TEST_CASE("gamma=1.5 profile matches the closed form to 1e-10") {
        PressureLaw law(1.5, 1.0);
        auto p = solve_profile(law, 2.0, 128);
        for (int k = 0; k <= p.n3; ++k) {
            const double exact = std::pow(std::sqrt(2.0) - p.z(k) / 3.0, 2.0);
            CHECK(std::abs(p.rho[k] - exact) <= 1e-10);
            CHECK(p.rho[k] == doctest::Approx(hydrostatic_closed_form(law, 2.0, p.z(k)))
                                  .epsilon(1e-10));
        }
    }

    TEST_CASE("profile is strictly decreasing and positive") {
        for (double gamma : {1.0, 1.5, 2.0, 3.0}) {
            PressureLaw law(gamma, 1.0);
            auto p = solve_profile(law, 2.0, 64);
            CHECK(p.kappa > 0.0);
            for (int k = 0; k < p.n3; ++k) CHECK(p.rho[k + 1] < p.rho[k]);
        }
    }

    TEST_CASE("vacuum abort") {
        PressureLaw law(2.0, 1.0);
        // 2a rho' = -1: rho(1) = rho0 - 0.5, so rho0 = 0.4 hits vacuum inside.
        CHECK_THROWS_AS(solve_profile(law, 0.4, 64), std::runtime_error);
    }

    TEST_CASE("discrete ODE residual small at interior nodes") {
        PressureLaw law(3.0, 1.0);
        auto p = solve_profile(law, 2.0, 128);
        // centered difference of a smooth solution: O(h^2) bound with margin
        CHECK(profile_ode_residual(p, law) < 5e-4);
    }

    TEST_CASE("discrete grad P = rho grad G identity") {
        // residual of P'(rho) D rho - rho D G with centered differences;
        // G is exactly linear in x3 so this collapses to solver error only
        // for the quadratic/linear closed-form profiles.
        for (double gamma : {1.5, 2.0}) {
            PressureLaw law(gamma, 1.0);
            auto p = solve_profile(law, 2.0, 128);
            auto g = potential(p, law);
            const double h = 1.0 / p.n3;
            for (int k = 1; k < p.n3; ++k) {
                const double drho = (p.rho[k + 1] - p.rho[k - 1]) / (2.0 * h);
                const double dg = (g[k + 1] - g[k - 1]) / (2.0 * h);
                CHECK(std::abs(law.dP(p.rho[k]) * drho - p.rho[k] * dg) <= 1e-8);
            }
        }
    }

    TEST_CASE("grid refinement shows at least 3.5th order against the closed form") {
        PressureLaw law(3.0, 1.0);
        auto err = [&](int n3) {
            auto p = solve_profile(law, 2.0, n3);
            double worst = 0.0;
            for (int k = 0; k <= n3; ++k)
                worst = std::max(worst,
                                 std::abs(p.rho[k] - hydrostatic_closed_form(law, 2.0, p.z(k))));
            return worst;
        };
        const double e64 = err(64), e128 = err(128), e256 = err(256);
        CHECK(std::log2(e64 / e128) >= 3.5);
        // the finest pair may sit on the round-off floor
        CHECK(e256 <= std::max(e128 / std::pow(2.0, 3.5), 5e-14));
    }

    TEST_CASE("vertical averages: constant profile and refined-grid oracle") {
        PressureLaw law(1.5, 1.0);
        // <rho> = int (sqrt2 - z/3)^2 and <rho/P'> = (2/3) int (sqrt2 - z/3),
        // both in closed form for the oracle.
        const double s2 = std::sqrt(2.0);
        const double exact_avg = (std::pow(s2, 3) - std::pow(s2 - 1.0 / 3.0, 3));
        auto p = solve_profile(law, 2.0, 4096);
        auto va = vertical_averages(p, law);
        CHECK(std::abs(va.avg_rho - exact_avg) <= 1e-8);
        // <rho/P'> with P' = 1.5 sqrt(rho): rho/P' = (2/3) sqrt(rho) = (2/3)(s2 - z/3)
        const double exact2 = (2.0 / 3.0) * (s2 - 1.0 / 6.0);
        CHECK(std::abs(va.avg_rho_over_dP - exact2) <= 1e-8);
    }
}
