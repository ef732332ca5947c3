#include <doctest.h>

#include <cmath>
#include <random>

#include "entropy_diag.hpp"

using namespace slabflow;

namespace {

NS3DConfig cfg16(double eps = 0.1) {
    NS3DConfig c;
    c.nh = 16;
    c.n3 = 16;
    c.eps = eps;
    c.dt = 1e-3;
    c.visc = ViscosityParams{1.0, eps, 1.0};
    return c;
}

}  // namespace

TEST_SUITE("entropy_diag") {
    TEST_CASE("essential/residual partition") {
        NS3DConfig c = cfg16();
        NS3DSolver s(c);
        s.set_rest_state();
        const double sigma = default_sigma(s.rho_bar_centers());

        auto d = decompose_ess_res(s.state().rho, s.rho_bar_centers(), sigma);
        CHECK(d.measure_res == 0.0);
        CHECK(d.measure_total == doctest::Approx(c.lh * c.lh).epsilon(1e-12));

        Field3D shifted = s.state().rho;
        for (auto& v : shifted.data()) v += 2.0 * sigma;
        d = decompose_ess_res(shifted, s.rho_bar_centers(), sigma);
        CHECK(d.measure_ess == 0.0);
        CHECK(d.measure_res == doctest::Approx(c.lh * c.lh).epsilon(1e-12));

        // mixed field: measures always sum to |Omega|
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-2.0 * sigma, 2.0 * sigma);
        Field3D mixed = s.state().rho;
        for (auto& v : mixed.data()) v += u(rng);
        d = decompose_ess_res(mixed, s.rho_bar_centers(), sigma);
        CHECK(d.measure_res + d.measure_ess == doctest::Approx(c.lh * c.lh).epsilon(1e-12));
        CHECK(d.measure_res > 0.0);
        CHECK(d.measure_ess > 0.0);

        CHECK_THROWS_AS(decompose_ess_res(s.state().rho, s.rho_bar_centers(), 10.0),
                        std::invalid_argument);
    }

    TEST_CASE("entropy report identities") {
        NS3DConfig c = cfg16();
        NS3DSolver s(c);
        const StaticState ss(c.law, c.rho_bottom);
        QGParams qp = ansatz_qg_params(ss, s.union_levels(), c.nh, c.lh, 1.0, c.dt);
        QGSolver qg(qp);
        qg.set_random_band(9, 2, 0.2);
        NS3DSolver run = make_well_prepared_solver(c, qg);

        const double sigma = default_sigma(run.rho_bar_centers());
        const double dx = c.lh / c.nh, dz = 1.0 / c.n3;

        // state == snapshot: all zeros
        auto rep = entropy_report(run.state(), run.state(), c.law, c.eps,
                                  run.rho_bar_centers(), sigma, dx, dz);
        CHECK(rep.theorem_functional == 0.0);
        CHECK(rep.rel_entropy == 0.0);

        // constant-in-cell velocity perturbation: kinetic = c^2 int rho
        Flow3DState pert = run.state();
        const double cpert = 0.3;
        for (auto& v : pert.u1.data()) v += cpert;
        rep = entropy_report(pert, run.state(), c.law, c.eps, run.rho_bar_centers(), sigma,
                             dx, dz);
        CHECK(rep.kinetic_error ==
              doctest::Approx(cpert * cpert * run.total_mass()).epsilon(1e-12));
        // gamma=2: entropy part is eps^-2 ||drho||_L2^2 exactly
        Flow3DState rpert = run.state();
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        double l2 = 0.0;
        for (auto& v : rpert.rho.data()) {
            const double d = u(rng);
            v += d;
            l2 += d * d;
        }
        l2 *= dx * dx * dz;
        rep = entropy_report(rpert, run.state(), c.law, c.eps, run.rho_bar_centers(), sigma,
                             dx, dz);
        CHECK(rep.rel_entropy == doctest::Approx(l2).epsilon(1e-10));
        CHECK(rep.theorem_functional ==
              doctest::Approx(rep.kinetic_error + rep.rel_entropy / (c.eps * c.eps))
                  .epsilon(1e-12));
    }

    TEST_CASE("lower bound: gamma=2 essential-only has c close to 1") {
        PressureLaw law(2.0, 1.0);
        const double c = fit_lower_bound_constant(law, 1.5, 2.0, 0.3);
        CHECK(c > 0.0);
        CHECK(c <= 1.0);  // for gamma=2, E = drho^2 so the essential ratio is 1
    }

    TEST_CASE("lower bound: zero violations on random admissible fields") {
        for (double gamma : {1.5, 2.0}) {
            PressureLaw law(gamma, 1.0);
            NS3DConfig c = cfg16();
            c.law = law;
            NS3DSolver s(c);
            s.set_rest_state();
            const auto& rb = s.rho_bar_centers();
            double lo = rb.front(), hi = rb.front();
            for (double v : rb) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double sigma = default_sigma(rb);
            const double cfit = fit_lower_bound_constant(law, lo, hi, sigma);

            // rho_app = rho_bar + admissible offset; rho arbitrary in (0, 10]
            std::mt19937_64 rng(7);
            std::uniform_real_distribution<double> off(-sigma / 2.0, sigma / 2.0);
            std::uniform_real_distribution<double> rho_d(1e-3, 10.0);
            Field3D rho = s.state().rho, rho_app = s.state().rho;
            for (int trial = 0; trial < 20; ++trial) {
                for (int k = 0; k < rho.nlev(); ++k)
                    for (int m = 0; m < c.nh * c.nh; ++m) {
                        rho_app.level_data(k)[m] = rb[k] + off(rng);
                        rho.level_data(k)[m] = rho_d(rng);
                    }
                CHECK(lower_bound_check(rho, rho_app, rb, law, sigma, cfit) == 0);
            }
            // state equal to snapshot: zero both sides, no violations
            CHECK(lower_bound_check(rho_app, rho_app, rb, law, sigma, cfit) == 0);
        }
    }

    TEST_CASE("scaling study: well-prepared start and decreasing functional") {
        ScalingStudyConfig sc;
        sc.nh = 16;
        sc.n3 = 16;
        sc.eps_list = {0.2, 0.1};
        sc.dt = 1e-3;
        sc.t_end = 0.1;
        sc.qg_amplitude = 0.2;
        sc.qg_modes = 2;
        sc.sample_every = 20;
        auto res = eps_scaling_study(sc);
        REQUIRE(res.all_ok);
        for (const auto& pe : res.per_eps) {
            CHECK(pe.functional_t0 <= 1e-10);
            CHECK(pe.functional > 0.0);
        }
        CHECK(res.per_eps[1].functional < res.per_eps[0].functional);
    }
}
