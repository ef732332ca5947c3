#include "spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slabflow {

namespace {

double linf_2d(const Field2D& f) {
    double m = 0.0;
    for (double v : f.data()) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> level_weights(const Field3D& f) {
    const auto& z = f.levels();
    const int nz = static_cast<int>(z.size());
    std::vector<double> w(nz);
    if (nz == 1) {
        w[0] = 1.0;
        return w;
    }
    const double dz = z[1] - z[0];
    const bool periodic = std::abs(z.back() - (1.0 - dz)) < 1e-12 && std::abs(z.front()) < 1e-12;
    if (periodic) {
        std::fill(w.begin(), w.end(), dz);
    } else {
        for (int k = 0; k < nz; ++k) {
            if (k == 0)
                w[k] = 0.5 * (z[1] - z[0]);
            else if (k == nz - 1)
                w[k] = 0.5 * (z[nz - 1] - z[nz - 2]);
            else
                w[k] = 0.5 * (z[k + 1] - z[k - 1]);
        }
    }
    return w;
}

}  // namespace

double integral_3d(const Field3D& f) {
    const auto w = level_weights(f);
    const double da = f.dx() * f.dx();
    double s = 0.0;
    const int nh = f.nh();
    for (int k = 0; k < f.nlev(); ++k) {
        double lev = 0.0;
        const double* p = f.level_data(k);
        for (int m = 0; m < nh * nh; ++m) lev += p[m];
        s += w[k] * lev;
    }
    return s * da;
}

double l2_norm_3d(const Field3D& f) {
    const auto w = level_weights(f);
    const double da = f.dx() * f.dx();
    double s = 0.0;
    const int nh = f.nh();
    for (int k = 0; k < f.nlev(); ++k) {
        double lev = 0.0;
        const double* p = f.level_data(k);
        for (int m = 0; m < nh * nh; ++m) lev += p[m] * p[m];
        s += w[k] * lev;
    }
    return std::sqrt(s * da);
}

double lp_norm_3d(const Field3D& f, double pexp) {
    const auto w = level_weights(f);
    const double da = f.dx() * f.dx();
    double s = 0.0;
    const int nh = f.nh();
    for (int k = 0; k < f.nlev(); ++k) {
        double lev = 0.0;
        const double* p = f.level_data(k);
        for (int m = 0; m < nh * nh; ++m) lev += std::pow(std::abs(p[m]), pexp);
        s += w[k] * lev;
    }
    return std::pow(s * da, 1.0 / pexp);
}

double linf_norm_3d(const Field3D& f) {
    double m = 0.0;
    for (double v : f.data()) m = std::max(m, std::abs(v));
    return m;
}

Field2D aniso_laplacian(const Spectral2D& sp, const Field2D& f, double mu) {
    Field2D out = sp.laplacian(f);
    for (auto& v : out.data()) v *= mu;
    return out;
}

Field3D aniso_laplacian(const Spectral3D& sp, const Field3D& f, const ViscosityParams& p) {
    std::vector<cplx> c;
    sp.forward(f, c);
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz2 = sp.kz(k) * sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky2 = sp.ky(j) * sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const double kh2 = sp.kx(i) * sp.kx(i) + ky2;
                c[sp.sidx(i, j, k)] *= -(p.mu * kh2 + p.eps_visc * kz2);
            }
        }
    }
    Field3D out = f;
    sp.inverse(c, out);
    return out;
}

namespace {

struct Spec3 {
    std::vector<cplx> c[3];
};

Spec3 fwd3(const Spectral3D& sp, const VectorField3D& u) {
    Spec3 s;
    for (int c = 0; c < 3; ++c) sp.forward(u[c], s.c[c]);
    return s;
}

VectorField3D inv3(const Spectral3D& sp, const Spec3& s, const Field3D& like) {
    VectorField3D u{like, like, like};
    for (int c = 0; c < 3; ++c) sp.inverse(s.c[c], u[c]);
    return u;
}

}  // namespace

VectorField3D lame(const Spectral3D& sp, const VectorField3D& u, const ViscosityParams& p) {
    p.validate();
    Spec3 s = fwd3(sp, u);
    Spec3 out;
    for (int c = 0; c < 3; ++c) out.c[c] = sp.make_spec();
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz = sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky = sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const double kx = sp.kx(i);
                const size_t m = sp.sidx(i, j, k);
                const double kh2 = kx * kx + ky * ky;
                const double visc = p.mu * kh2 + p.eps_visc * kz * kz;
                const cplx div = cplx(0.0, 1.0) * (kx * s.c[0][m] + ky * s.c[1][m] + kz * s.c[2][m]);
                // -Delta_{mu,eps} u - lambda grad div u
                out.c[0][m] = visc * s.c[0][m] - p.lambda * cplx(0.0, kx) * div;
                out.c[1][m] = visc * s.c[1][m] - p.lambda * cplx(0.0, ky) * div;
                out.c[2][m] = visc * s.c[2][m] - p.lambda * cplx(0.0, kz) * div;
            }
        }
    }
    return inv3(sp, out, u[0]);
}

VectorField3D leray_Q(const Spectral3D& sp, const VectorField3D& u) {
    Spec3 s = fwd3(sp, u);
    Spec3 out;
    for (int c = 0; c < 3; ++c) out.c[c] = sp.make_spec();
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz = sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky = sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const double kx = sp.kx(i);
                const size_t m = sp.sidx(i, j, k);
                const double k2 = kx * kx + ky * ky + kz * kz;
                if (k2 == 0.0) continue;  // mean mode belongs to P
                const cplx kdotu = kx * s.c[0][m] + ky * s.c[1][m] + kz * s.c[2][m];
                out.c[0][m] = kx * kdotu / k2;
                out.c[1][m] = ky * kdotu / k2;
                out.c[2][m] = kz * kdotu / k2;
            }
        }
    }
    return inv3(sp, out, u[0]);
}

VectorField3D leray_P(const Spectral3D& sp, const VectorField3D& u) {
    VectorField3D q = leray_Q(sp, u);
    VectorField3D p = u;
    for (int c = 0; c < 3; ++c)
        for (size_t m = 0; m < p[c].size(); ++m) p[c].data()[m] -= q[c].data()[m];
    return p;
}

namespace {

/// (-Delta)^{-1} Delta_{mu,eps} f, zero mean mode.
std::vector<cplx> inv_lap_aniso(const Spectral3D& sp, const std::vector<cplx>& f,
                                const ViscosityParams& p) {
    std::vector<cplx> out = f;
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz2 = sp.kz(k) * sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky2 = sp.ky(j) * sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const double kh2 = sp.kx(i) * sp.kx(i) + ky2;
                const double k2 = kh2 + kz2;
                const size_t m = sp.sidx(i, j, k);
                // Delta_{mu,eps} contributes -(mu kh^2 + eps kz^2)
                out[m] = (k2 > 0.0) ? out[m] * (-(p.mu * kh2 + p.eps_visc * kz2) / k2)
                                    : cplx{0, 0};
            }
        }
    }
    return out;
}

std::vector<cplx> apply_dz(const Spectral3D& sp, const std::vector<cplx>& f) {
    std::vector<cplx> out = f;
    for (int k = 0; k < sp.n3(); ++k) {
        const cplx ikz(0.0, sp.kz(k));
        for (int j = 0; j < sp.nh(); ++j)
            for (int i = 0; i < sp.nkx(); ++i) out[sp.sidx(i, j, k)] *= ikz;
    }
    return out;
}

std::vector<cplx> apply_grad_component(const Spectral3D& sp, const std::vector<cplx>& f, int c) {
    std::vector<cplx> out = f;
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz = sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky = sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const double kv = (c == 0) ? sp.kx(i) : (c == 1) ? ky : kz;
                out[sp.sidx(i, j, k)] *= cplx(0.0, kv);
            }
        }
    }
    return out;
}

std::vector<cplx> apply_inv_neg_lap(const Spectral3D& sp, const std::vector<cplx>& f) {
    std::vector<cplx> out = f;
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz2 = sp.kz(k) * sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky2 = sp.ky(j) * sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const double k2 = sp.kx(i) * sp.kx(i) + ky2 + kz2;
                const size_t m = sp.sidx(i, j, k);
                out[m] = (k2 > 0.0) ? out[m] / k2 : cplx{0, 0};
            }
        }
    }
    return out;
}

std::vector<cplx> div_spec(const Spectral3D& sp, const Spec3& v) {
    std::vector<cplx> out = sp.make_spec();
    for (int k = 0; k < sp.n3(); ++k) {
        const double kz = sp.kz(k);
        for (int j = 0; j < sp.nh(); ++j) {
            const double ky = sp.ky(j);
            for (int i = 0; i < sp.nkx(); ++i) {
                const size_t m = sp.sidx(i, j, k);
                out[m] = cplx(0.0, 1.0) *
                         (sp.kx(i) * v.c[0][m] + ky * v.c[1][m] + kz * v.c[2][m]);
            }
        }
    }
    return out;
}

}  // namespace

CommutatorPair commutator_C(const Spectral3D& sp, const VectorField3D& h,
                            const std::function<double(double)>& rho_bar,
                            const std::function<double(double)>& drho_bar,
                            const ViscosityParams& p, double kappa) {
    if (!(kappa > 0.0)) throw std::domain_error("commutator_C: kappa must be > 0");
    const int nh = sp.nh(), n3 = sp.n3();
    std::vector<double> inv_rho(n3), coef(n3);
    for (int k = 0; k < n3; ++k) {
        const double z = static_cast<double>(k) / n3;
        const double r = rho_bar(z);
        if (!(r >= kappa)) throw std::domain_error("commutator_C: rho_bar below kappa");
        inv_rho[k] = 1.0 / r;
        coef[k] = drho_bar(z) / (r * r);
    }

    CommutatorPair out;
    const Field3D like = h[0];
    out.lhs = {like, like, like};
    out.rhs = {like, like, like};
    out.max_diff = 0.0;

    for (int comp = 0; comp < 3; ++comp) {
        std::vector<cplx> hj;
        sp.forward(h[comp], hj);

        // A = (-Delta)^{-1} Delta_{mu,eps} h_j
        const std::vector<cplx> A = inv_lap_aniso(sp, hj, p);

        // rhs_j = coef(z) * (d3 A + eps d3 h_j)
        Field3D d3A = like, d3h = like;
        sp.inverse(apply_dz(sp, A), d3A);
        sp.inverse(apply_dz(sp, hj), d3h);
        for (int k = 0; k < n3; ++k) {
            double* r = out.rhs[comp].level_data(k);
            const double* a = d3A.level_data(k);
            const double* b = d3h.level_data(k);
            for (int m = 0; m < nh * nh; ++m) r[m] = coef[k] * (a[m] + p.eps_visc * b[m]);
        }

        // lhs_j = div( -(1/rho) grad A + grad (-Delta)^{-1} div((1/rho) v) ),
        // v = grad_{mu^2, eps^2} h_j.
        Spec3 w;
        for (int c = 0; c < 3; ++c) {
            const double scale = (c == 2) ? p.eps_visc : p.mu;
            std::vector<cplx> vc = apply_grad_component(sp, hj, c);
            Field3D vphys = like;
            for (auto& x : vc) x *= scale;
            sp.inverse(vc, vphys);
            for (int k = 0; k < n3; ++k) {
                double* pv = vphys.level_data(k);
                for (int m = 0; m < nh * nh; ++m) pv[m] *= inv_rho[k];
            }
            sp.forward(vphys, w.c[c]);
        }
        std::vector<cplx> phi = apply_inv_neg_lap(sp, div_spec(sp, w));

        Spec3 total;
        for (int c = 0; c < 3; ++c) {
            // -(1/rho) grad A in physical space
            Field3D ga = like;
            sp.inverse(apply_grad_component(sp, A, c), ga);
            for (int k = 0; k < n3; ++k) {
                double* g = ga.level_data(k);
                for (int m = 0; m < nh * nh; ++m) g[m] *= -inv_rho[k];
            }
            sp.forward(ga, total.c[c]);
            const std::vector<cplx> gphi = apply_grad_component(sp, phi, c);
            for (size_t m = 0; m < total.c[c].size(); ++m) total.c[c][m] += gphi[m];
        }
        sp.inverse(div_spec(sp, total), out.lhs[comp]);

        for (size_t m = 0; m < out.lhs[comp].size(); ++m)
            out.max_diff = std::max(out.max_diff,
                                    std::abs(out.lhs[comp].data()[m] - out.rhs[comp].data()[m]));
    }
    return out;
}

VectorField2D helmholtz_2d(const Spectral2D& sp, const Field2D& a, const Field2D& b) {
    const double scale = std::max({1.0, linf_2d(a), linf_2d(b)});
    if (std::abs(sp.mean(a)) > 1e-12 * scale || std::abs(sp.mean(b)) > 1e-12 * scale)
        throw std::invalid_argument("helmholtz_2d: inputs must have zero mean");

    std::vector<cplx> ah, bh;
    sp.forward(a, ah);
    sp.forward(b, bh);
    sp.apply_inv_neg_laplacian(ah.data());
    sp.apply_inv_neg_laplacian(bh.data());

    // F = -grad_perp psi_a - grad psi_b, grad_perp = (-d2, d1).
    std::vector<cplx> f1 = ah, f2 = ah;
    sp.apply_ddy(f1.data());
    sp.apply_ddx(f2.data());
    for (auto& v : f2) v = -v;
    std::vector<cplx> g1 = bh, g2 = bh;
    sp.apply_ddx(g1.data());
    sp.apply_ddy(g2.data());
    for (size_t m = 0; m < f1.size(); ++m) {
        f1[m] -= g1[m];
        f2[m] -= g2[m];
    }
    VectorField2D F{Field2D(sp.n(), sp.l()), Field2D(sp.n(), sp.l())};
    sp.inverse(f1, F[0]);
    sp.inverse(f2, F[1]);
    return F;
}

namespace {

/// 4th-order vertical derivative on a uniform node set.
void ddz_nodes(const Field3D& f, Field3D& out) {
    const int nz = f.nlev(), nh = f.nh();
    const double h = f.z(1) - f.z(0);
    auto v = [&](int i, int j, int k) { return f.at(i, j, k); };
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < nh; ++j) {
            for (int i = 0; i < nh; ++i) {
                double d;
                if (k >= 2 && k <= nz - 3) {
                    d = (-v(i, j, k + 2) + 8 * v(i, j, k + 1) - 8 * v(i, j, k - 1) +
                         v(i, j, k - 2)) /
                        (12 * h);
                } else if (k == 0) {
                    d = (-25 * v(i, j, 0) + 48 * v(i, j, 1) - 36 * v(i, j, 2) + 16 * v(i, j, 3) -
                         3 * v(i, j, 4)) /
                        (12 * h);
                } else if (k == 1) {
                    d = (-3 * v(i, j, 0) - 10 * v(i, j, 1) + 18 * v(i, j, 2) - 6 * v(i, j, 3) +
                         v(i, j, 4)) /
                        (12 * h);
                } else if (k == nz - 2) {
                    d = (3 * v(i, j, nz - 1) + 10 * v(i, j, nz - 2) - 18 * v(i, j, nz - 3) +
                         6 * v(i, j, nz - 4) - v(i, j, nz - 5)) /
                        (12 * h);
                } else {  // k == nz-1
                    d = (25 * v(i, j, nz - 1) - 48 * v(i, j, nz - 2) + 36 * v(i, j, nz - 3) -
                         16 * v(i, j, nz - 4) + 3 * v(i, j, nz - 5)) /
                        (12 * h);
                }
                out.at(i, j, k) = d;
            }
        }
    }
}

}  // namespace

double linf_norm_2d(const Field2D& f) { return linf_2d(f); }

double SobolevNorms::ratio(double kappa) const {
    if (!(kappa > 0.0)) throw std::domain_error("SobolevNorms::ratio: kappa must be > 0");
    const double denom = grad_h_l2 / std::sqrt(kappa) + kappa * dz_l2;
    if (!(denom > 0.0)) throw std::domain_error("SobolevNorms::ratio: zero field");
    return l6 / denom;
}

double SobolevNorms::optimal_kappa() const {
    if (!(grad_h_l2 > 0.0) || !(dz_l2 > 0.0))
        throw std::domain_error("SobolevNorms::optimal_kappa: zero field");
    // minimize kappa^{-1/2} A + kappa B
    return std::pow(grad_h_l2 / (2.0 * dz_l2), 2.0 / 3.0);
}

SobolevNorms aniso_sobolev_norms(const VectorField3D& u) {
    const int nh = u[0].nh();
    Spectral2D sp(nh, u[0].lh());

    double gh2 = 0.0, gz2 = 0.0;

    // ||u||_L6 via the scalar |u|^2: int |u|^6 = int (|u|^2)^3.
    Field3D mag2 = u[0];
    for (size_t m = 0; m < mag2.size(); ++m) {
        const double a = u[0].data()[m], b = u[1].data()[m], c = u[2].data()[m];
        mag2.data()[m] = a * a + b * b + c * c;
    }
    SobolevNorms out;
    out.l6 = std::sqrt(lp_norm_3d(mag2, 3.0));

    for (int c = 0; c < 3; ++c) {
        Field3D dz = u[c];
        ddz_nodes(u[c], dz);
        for (auto& v : dz.data()) v = v * v;
        gz2 += integral_3d(dz);

        Field3D gx = u[c], gy = u[c];
        for (int k = 0; k < u[c].nlev(); ++k) {
            Field2D lev(nh, u[c].lh());
            std::copy(u[c].level_data(k), u[c].level_data(k) + nh * nh, lev.data().begin());
            const Field2D dx = sp.ddx(lev), dy = sp.ddy(lev);
            std::copy(dx.data().begin(), dx.data().end(), gx.level_data(k));
            std::copy(dy.data().begin(), dy.data().end(), gy.level_data(k));
        }
        for (auto& v : gx.data()) v = v * v;
        for (auto& v : gy.data()) v = v * v;
        gh2 += integral_3d(gx) + integral_3d(gy);
    }
    out.grad_h_l2 = std::sqrt(gh2);
    out.dz_l2 = std::sqrt(gz2);
    return out;
}

double aniso_sobolev_ratio(const VectorField3D& u, double kappa) {
    if (!(kappa > 0.0)) throw std::domain_error("aniso_sobolev_ratio: kappa must be > 0");
    return aniso_sobolev_norms(u).ratio(kappa);
}

}  // namespace slabflow
