#include <doctest.h>

#include <cmath>
#include <random>

#include "pressure.hpp"

using namespace slabflow;

namespace {

// Independent oracle for H: adaptive Simpson quadrature of rho*int_1^rho P(z)/z^2 dz.
double oracle_H(const PressureLaw& law, double rho, int n = 20000) {
    const double lo = std::min(1.0, rho), hi = std::max(1.0, rho);
    if (lo == hi) return 0.0;
    const double h = (hi - lo) / n;
    auto f = [&](double z) { return law.P(z) / (z * z); };
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    double integral = s * h / 3.0;
    if (rho < 1.0) integral = -integral;
    return rho * integral;
}

}  // namespace

TEST_SUITE("pressure") {
    TEST_CASE("monomial law evaluates directly") {
        CHECK(PressureLaw(2.0, 1.0).P(2.0) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(PressureLaw(1.5, 1.0).P(0.0) == 0.0);
        CHECK(PressureLaw(3.0, 0.5).P(2.0) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK_THROWS_AS(PressureLaw(2.0, 1.0).P(-1.0), std::domain_error);
    }

    TEST_CASE("closed-form internal energy") {
        PressureLaw g2(2.0, 1.0);
        CHECK(g2.H(3.0) == doctest::Approx(6.0).epsilon(1e-14));
        CHECK(g2.H(1.0) == doctest::Approx(0.0).epsilon(1e-14));
        PressureLaw g15(1.5, 1.0);
        CHECK(g15.H(4.0) == doctest::Approx(8.0).epsilon(1e-14));
        CHECK_THROWS_AS(g2.dH(0.0), std::domain_error);
    }

    TEST_CASE("H matches the quadrature oracle") {
        for (double gamma : {1.0, 1.5, 2.0, 3.0}) {
            PressureLaw law(gamma, 1.0);
            for (double rho : {0.3, 0.9, 1.7, 4.0}) {
                CHECK(law.H(rho) == doctest::Approx(oracle_H(law, rho)).epsilon(1e-10));
            }
        }
    }

    TEST_CASE("rho H'' = P' to 1e-12 relative, closed forms") {
        for (double gamma : {1.0, 1.5, 2.0, 3.0}) {
            PressureLaw law(gamma, 1.3);
            std::mt19937_64 rng(42);
            std::uniform_real_distribution<double> d(1e-3, 10.0);
            for (int i = 0; i < 1000; ++i) {
                const double rho = d(rng);
                const double lhs = rho * law.d2H(rho);
                const double rhs = law.dP(rho);
                CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
            }
        }
    }

    TEST_CASE("relative energy: gamma=2 is the squared difference") {
        PressureLaw law(2.0, 1.0);
        CHECK(law.relative_energy(3.0, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> d(1e-3, 8.0);
        for (int i = 0; i < 1000; ++i) {
            const double rho = d(rng), r = d(rng);
            const double e = law.relative_energy(rho, r);
            CHECK(std::abs(e - (rho - r) * (rho - r)) <= 1e-12 * std::max(1.0, e));
        }
    }

    TEST_CASE("relative energy identity case and quadrature oracle") {
        PressureLaw law(1.5, 1.0);
        CHECK(law.relative_energy(2.0, 2.0) == doctest::Approx(0.0).epsilon(1e-14));
        const double expected = oracle_H(law, 2.0) - oracle_H(law, 1.0) - law.dH(1.0) * 1.0;
        CHECK(law.relative_energy(2.0, 1.0) == doctest::Approx(expected).epsilon(1e-10));
        CHECK_THROWS_AS(law.relative_energy(1.0, 0.0), std::domain_error);
    }

    TEST_CASE("relative energy is nonnegative, zero iff equal") {
        for (double gamma : {1.0, 1.5, 2.0, 3.0}) {
            PressureLaw law(gamma, 1.0);
            std::mt19937_64 rng(11);
            std::uniform_real_distribution<double> d(1e-3, 10.0);
            for (int i = 0; i < 100000; ++i) {
                const double rho = d(rng), r = d(rng);
                const double e = law.relative_energy(rho, r);
                CHECK(e >= -1e-14);
                if (std::abs(rho - r) > 1e-6) CHECK(e > 0.0);
            }
        }
    }

    TEST_CASE("convexity of H on sampled triples") {
        for (double gamma : {1.0, 1.5, 3.0}) {
            PressureLaw law(gamma, 1.0);
            std::mt19937_64 rng(13);
            std::uniform_real_distribution<double> d(1e-2, 10.0);
            std::uniform_real_distribution<double> td(0.01, 0.99);
            for (int i = 0; i < 10000; ++i) {
                double r1 = d(rng), r2 = d(rng);
                if (r1 > r2) std::swap(r1, r2);
                const double t = td(rng);
                const double mid = t * r1 + (1.0 - t) * r2;
                CHECK(law.H(mid) <= t * law.H(r1) + (1.0 - t) * law.H(r2) + 1e-12);
            }
        }
    }

    TEST_CASE("entropy sandwich: gamma=2 has c1=c2=1 exactly") {
        PressureLaw law(2.0, 1.0);
        EntropyBounds b = fit_entropy_bounds(law, 0.5, 2.0, 1.0, 100000, 1);
        CHECK(b.c1 == doctest::Approx(1.0).epsilon(2e-3));
        CHECK(b.c2 == doctest::Approx(1.0).epsilon(2e-3));
        auto s = b.check(law, 2.0, 2.0);
        CHECK(s.lower == 0.0);
        CHECK(s.value == 0.0);
        CHECK(s.upper == 0.0);
        CHECK(!s.violated);
    }

    TEST_CASE("entropy sandwich validated on fresh samples") {
        for (double gamma : {1.5, 2.0, 3.0}) {
            PressureLaw law(gamma, 1.0);
            EntropyBounds b = fit_entropy_bounds(law, 0.5, 2.0, 1.0, 100000, 101);
            std::mt19937_64 rng(202);
            std::uniform_real_distribution<double> rho_d(0.0, 10.0);
            std::uniform_real_distribution<double> r_d(0.5, 2.0);
            int violations = 0;
            for (int i = 0; i < 100000; ++i) {
                const double rho = rho_d(rng), r = r_d(rng);
                if (b.check(law, rho, r).violated) ++violations;
            }
            CHECK(violations == 0);
        }
        CHECK_THROWS_AS(fit_entropy_bounds(PressureLaw(2.0, 1.0), 2.0, 0.5, 1.0, 10, 1),
                        std::invalid_argument);
    }
}
