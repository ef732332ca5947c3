#include <doctest.h>

#include <cmath>
#include <random>

#include "spectral_ops.hpp"

using namespace slabflow;

namespace {

Field3D random_band_field(int nh, double lh, int n3, int band, uint64_t seed) {
    Spectral3D sp(nh, lh, n3);
    Field3D f = Field3D::periodic(nh, lh, n3);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (auto& v : f.data()) v = d(rng);
    std::vector<cplx> c;
    sp.forward(f, c);
    for (int k = 0; k < n3; ++k) {
        const int mk = (k <= n3 / 2) ? k : k - n3;
        for (int j = 0; j < nh; ++j) {
            const int mj = (j <= nh / 2) ? j : j - nh;
            for (int i = 0; i < sp.nkx(); ++i)
                if (i > band || std::abs(mj) > band || std::abs(mk) > band)
                    c[sp.sidx(i, j, k)] = 0.0;
        }
    }
    sp.inverse(c, f);
    return f;
}

}  // namespace

TEST_SUITE("spectral_ops") {
    TEST_CASE("anisotropic laplacian on single modes") {
        const int n = 32;
        const double lh = 2.0 * std::numbers::pi;
        Spectral3D sp(n, lh, n);
        ViscosityParams p{2.0, 0.1, 1.0};

        Field3D f = Field3D::periodic(n, lh, n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) f.at(i, j, k) = std::sin(i * lh / n);
        Field3D out = aniso_laplacian(sp, f, p);
        for (size_t m = 0; m < f.size(); ++m)
            CHECK(out.data()[m] == doctest::Approx(-2.0 * f.data()[m]).epsilon(1e-10));

        // constant field
        Field3D c = Field3D::periodic(n, lh, n);
        for (auto& v : c.data()) v = 3.14;
        out = aniso_laplacian(sp, c, p);
        for (double v : out.data()) CHECK(std::abs(v) <= 1e-12);

        // mixed mode sin(x1) sin(2 pi x3): eigenvalue -(mu + eps 4 pi^2)
        ViscosityParams p2{1.0, 0.1, 1.0};
        Field3D g = Field3D::periodic(n, lh, n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    g.at(i, j, k) =
                        std::sin(i * lh / n) * std::sin(2.0 * std::numbers::pi * g.z(k));
        out = aniso_laplacian(sp, g, p2);
        const double lam = -(1.0 + 0.1 * 4.0 * std::numbers::pi * std::numbers::pi);
        for (size_t m = 0; m < g.size(); ++m)
            CHECK(std::abs(out.data()[m] - lam * g.data()[m]) <= 1e-9);
    }

    TEST_CASE("Lame operator: divergence-free mode and gradient mode") {
        const int n = 16;
        const double lh = 2.0 * std::numbers::pi;
        Spectral3D sp(n, lh, n);
        ViscosityParams p{1.0, 0.1, 0.7};

        // u = (sin x2, 0, 0): divergence free, Lu = -Delta_{mu,eps} u = mu u
        Field3D z = Field3D::periodic(n, lh, n);
        VectorField3D u{z, z, z};
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) u[0].at(i, j, k) = std::sin(j * lh / n);
        VectorField3D lu = lame(sp, u, p);
        for (size_t m = 0; m < z.size(); ++m) {
            CHECK(lu[0].data()[m] == doctest::Approx(p.mu * u[0].data()[m]).epsilon(1e-10));
            CHECK(std::abs(lu[1].data()[m]) <= 1e-12);
            CHECK(std::abs(lu[2].data()[m]) <= 1e-12);
        }

        // gradient field u = grad(sin x1): L u = (mu + lambda) u (single mode)
        VectorField3D g{z, z, z};
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) g[0].at(i, j, k) = std::cos(i * lh / n);
        lu = lame(sp, g, p);
        for (size_t m = 0; m < z.size(); ++m)
            CHECK(lu[0].data()[m] ==
                  doctest::Approx((p.mu + p.lambda) * g[0].data()[m]).epsilon(1e-10));

        // zero in, zero out
        VectorField3D zero{z, z, z};
        lu = lame(sp, zero, p);
        for (int c = 0; c < 3; ++c)
            for (double v : lu[c].data()) CHECK(v == 0.0);
    }

    TEST_CASE("Leray projectors: idempotent, complementary, divergence-free") {
        const int n = 16;
        const double lh = 2.0 * std::numbers::pi;
        Spectral3D sp(n, lh, n);
        Field3D f1 = random_band_field(n, lh, n, 5, 1);
        Field3D f2 = random_band_field(n, lh, n, 5, 2);
        Field3D f3 = random_band_field(n, lh, n, 5, 3);
        VectorField3D u{f1, f2, f3};

        VectorField3D pu = leray_P(sp, u), qu = leray_Q(sp, u);
        // P + Q = Id
        for (int c = 0; c < 3; ++c)
            for (size_t m = 0; m < f1.size(); ++m)
                CHECK(std::abs(pu[c].data()[m] + qu[c].data()[m] - u[c].data()[m]) <= 1e-12);
        // div P u = 0 spectrally
        Field3D div = sp.ddx(pu[0]);
        {
            Field3D t = sp.ddy(pu[1]);
            for (size_t m = 0; m < div.size(); ++m) div.data()[m] += t.data()[m];
            t = sp.ddz(pu[2]);
            for (size_t m = 0; m < div.size(); ++m) div.data()[m] += t.data()[m];
        }
        CHECK(linf_norm_3d(div) <= 1e-12 * (1.0 + linf_norm_3d(u[0])));
        // idempotence and annihilation
        VectorField3D ppu = leray_P(sp, pu), qqu = leray_Q(sp, qu), pqu = leray_P(sp, qu);
        for (int c = 0; c < 3; ++c)
            for (size_t m = 0; m < f1.size(); ++m) {
                CHECK(std::abs(ppu[c].data()[m] - pu[c].data()[m]) <= 1e-12);
                CHECK(std::abs(qqu[c].data()[m] - qu[c].data()[m]) <= 1e-12);
                CHECK(std::abs(pqu[c].data()[m]) <= 1e-12);
            }

        // gradient field: P kills it (up to its mean, which is zero here)
        Field3D phi = random_band_field(n, lh, n, 4, 7);
        VectorField3D grad{sp.ddx(phi), sp.ddy(phi), sp.ddz(phi)};
        VectorField3D pg = leray_P(sp, grad);
        for (int c = 0; c < 3; ++c) CHECK(linf_norm_3d(pg[c]) <= 1e-12);
    }

    TEST_CASE("commutator identity: constant and isotropic degenerate cases") {
        const int n = 16;
        const double lh = 2.0 * std::numbers::pi;
        Spectral3D sp(n, lh, n);
        Field3D f1 = random_band_field(n, lh, n, 4, 11);
        Field3D f2 = random_band_field(n, lh, n, 4, 12);
        Field3D f3 = random_band_field(n, lh, n, 4, 13);
        VectorField3D h{f1, f2, f3};

        // constant rho_bar: both sides vanish
        ViscosityParams p{1.0, 0.1, 0.5};
        auto pair = commutator_C(sp, h, [](double) { return 2.0; }, [](double) { return 0.0; }, p);
        CHECK(pair.max_diff <= 1e-11);
        for (int c = 0; c < 3; ++c) {
            CHECK(linf_norm_3d(pair.rhs[c]) <= 1e-12);
            CHECK(linf_norm_3d(pair.lhs[c]) <= 1e-10);
        }

        // isotropic mu = eps: closed form degenerates to zero
        ViscosityParams iso{0.7, 0.7, 0.5};
        auto rho = [](double z) { return 2.0 + 0.1 * std::cos(2.0 * std::numbers::pi * z); };
        auto drho = [](double z) {
            return -0.2 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * z);
        };
        pair = commutator_C(sp, h, rho, drho, iso);
        for (int c = 0; c < 3; ++c) CHECK(linf_norm_3d(pair.rhs[c]) <= 1e-11);
        CHECK(pair.max_diff <= 1e-9);
    }

    TEST_CASE("commutator identity: 20 random anisotropic draws agree to 1e-8") {
        const int n = 32;
        const double lh = 2.0 * std::numbers::pi;
        Spectral3D sp(n, lh, n);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> amp(0.05, 0.2);
        std::uniform_real_distribution<double> visc(0.05, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            Field3D f1 = random_band_field(n, lh, n, 6, 100 + 3 * trial);
            Field3D f2 = random_band_field(n, lh, n, 6, 101 + 3 * trial);
            Field3D f3 = random_band_field(n, lh, n, 6, 102 + 3 * trial);
            VectorField3D h{f1, f2, f3};
            const double a = amp(rng);
            ViscosityParams p{visc(rng), visc(rng), 0.5};
            auto rho = [a](double z) { return 2.0 + a * std::cos(2.0 * std::numbers::pi * z); };
            auto drho = [a](double z) {
                return -2.0 * a * std::numbers::pi * std::sin(2.0 * std::numbers::pi * z);
            };
            auto pair = commutator_C(sp, h, rho, drho, p);
            CHECK(pair.max_diff <= 1e-8);
        }
    }

    TEST_CASE("helmholtz_2d: reconstruction and error cases") {
        const int n = 64;
        const double lh = 2.0 * std::numbers::pi;
        Spectral2D sp(n, lh);

        // zero input
        Field2D zero(n, lh);
        VectorField2D F = helmholtz_2d(sp, zero, zero);
        CHECK(linf_norm_2d(F[0]) == 0.0);

        // a = sin x1 sin x2, b = 0: F = -grad_perp(sin sin)/2
        Field2D a(n, lh);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                a.at(i, j) = std::sin(a.x(i)) * std::sin(a.x(j));
        F = helmholtz_2d(sp, a, zero);
        const VectorField2D gp = sp.gradient_perp(a);
        for (size_t m = 0; m < a.size(); ++m) {
            CHECK(F[0].data()[m] == doctest::Approx(-0.5 * gp[0].data()[m]).epsilon(1e-11));
            CHECK(F[1].data()[m] == doctest::Approx(-0.5 * gp[1].data()[m]).epsilon(1e-11));
        }

        // random zero-mean pair without Nyquist content: curl F = a, div F = b
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        Field2D ra(n, lh), rb(n, lh);
        for (auto& v : ra.data()) v = d(rng);
        for (auto& v : rb.data()) v = d(rng);
        for (Field2D* f : {&ra, &rb}) {
            std::vector<cplx> c;
            sp.forward(*f, c);
            c[sp.sidx(0, 0)] = 0.0;
            for (int j = 0; j < n; ++j) c[sp.sidx(n / 2, j)] = 0.0;
            for (int i = 0; i <= n / 2; ++i) c[sp.sidx(i, n / 2)] = 0.0;
            sp.inverse(c, *f);
        }
        F = helmholtz_2d(sp, ra, rb);
        const Field2D curl1 = sp.ddx(F[1]), curl2 = sp.ddy(F[0]);
        const Field2D div1 = sp.ddx(F[0]), div2 = sp.ddy(F[1]);
        for (size_t m = 0; m < ra.size(); ++m) {
            CHECK(std::abs(curl1.data()[m] - curl2.data()[m] - ra.data()[m]) <= 1e-11);
            CHECK(std::abs(div1.data()[m] + div2.data()[m] - rb.data()[m]) <= 1e-11);
        }

        // nonzero mean rejected
        Field2D bad(n, lh);
        for (auto& v : bad.data()) v = 1.0;
        CHECK_THROWS_AS(helmholtz_2d(sp, bad, zero), std::invalid_argument);
    }

    TEST_CASE("anisotropic Sobolev ratio: bounded over kappa and rescaling sweep") {
        // horizontally localized bump times x3(1-x3); emulates the whole-space
        // scaling on the torus.
        const int nh = 128, n3 = 48;
        const double lh = 2.0 * std::numbers::pi;
        const double w = lh / 12.0;

        auto make_u = [&](double s) {
            Field3D z = Field3D::nodes(nh, lh, n3);
            VectorField3D u{z, z, z};
            const double c = lh / 2.0;
            for (int k = 0; k <= n3; ++k) {
                const double vert = z.z(k) * (1.0 - z.z(k));
                for (int j = 0; j < nh; ++j)
                    for (int i = 0; i < nh; ++i) {
                        const double dx = (i * lh / nh - c) * s, dy = (j * lh / nh - c) * s;
                        const double bump = std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
                        u[0].at(i, j, k) = bump * vert;
                        u[1].at(i, j, k) = 0.5 * bump * vert;
                        u[2].at(i, j, k) = -0.25 * bump * vert;
                    }
            }
            return u;
        };

        // all ratios bounded by one fitted constant
        const SobolevNorms base = aniso_sobolev_norms(make_u(1.0));
        std::vector<double> ratios;
        for (double kappa : {0.1, 1.0, 10.0}) ratios.push_back(base.ratio(kappa));
        for (double r : ratios) CHECK(std::isfinite(r));

        // optimal-kappa ratios across the rescaling sweep agree within 5%
        auto opt_ratio = [&](double s) {
            const SobolevNorms nm = aniso_sobolev_norms(make_u(s));
            return nm.ratio(nm.optimal_kappa());
        };
        const double r1 = opt_ratio(1.0), r2 = opt_ratio(2.0), r4 = opt_ratio(4.0);
        CHECK(std::abs(r2 - r1) / r1 < 0.05);
        CHECK(std::abs(r4 - r1) / r1 < 0.05);

        const double cfit = std::max({r1, r2, r4, ratios[0], ratios[1], ratios[2]});
        for (double r : ratios) CHECK(r <= cfit + 1e-12);

        // zero field rejected
        Field3D z = Field3D::nodes(16, lh, 8);
        VectorField3D zero{z, z, z};
        CHECK_THROWS_AS(aniso_sobolev_ratio(zero, 1.0), std::domain_error);
    }
}
