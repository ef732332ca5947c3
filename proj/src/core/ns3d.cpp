#include "ns3d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spectral.hpp"

namespace slabflow {

struct NS3DSolver::Scratch {
    // spectral workspaces per prognostic field, level-major
    std::vector<cplx> r, u1, u2, w, rhs, rnew;
    // real work arrays for the explicit stage
    std::vector<double> divu, fx, fy, fz;
};

NS3DSolver::~NS3DSolver() { delete static_cast<Spectral2D*>(fft_); }

NS3DSolver::NS3DSolver(NS3DSolver&& o) noexcept
    : cfg_(o.cfg_), nh_(o.nh_), n3_(o.n3_), dx_(o.dx_), dz_(o.dz_), zc_(std::move(o.zc_)),
      zf_(std::move(o.zf_)), rbc_(std::move(o.rbc_)), rbf_(std::move(o.rbf_)),
      pbc_(std::move(o.pbc_)), dpc_(std::move(o.dpc_)), st_(std::move(o.st_)),
      diss_integral_(o.diss_integral_), tri_(std::move(o.tri_)), fft_(o.fft_),
      scr_(std::move(o.scr_)) {
    o.fft_ = nullptr;
}

NS3DSolver::NS3DSolver(const NS3DConfig& cfg) : cfg_(cfg), nh_(cfg.nh), n3_(cfg.n3) {
    if (nh_ < 4 || (nh_ & (nh_ - 1)) != 0) throw std::invalid_argument("NS3D: nh power of two");
    if (n3_ < 4) throw std::invalid_argument("NS3D: n3 too small");
    if (!(cfg.eps > 0.0) || !(cfg.dt > 0.0)) throw std::invalid_argument("NS3D: bad eps or dt");
    cfg_.visc.validate();
    dx_ = cfg.lh / nh_;
    dz_ = 1.0 / n3_;
    zc_.resize(n3_);
    zf_.resize(n3_ + 1);
    for (int k = 0; k < n3_; ++k) zc_[k] = (k + 0.5) * dz_;
    for (int j = 0; j <= n3_; ++j) zf_[j] = j * dz_;

    const StaticState ss(cfg.law, cfg.rho_bottom);
    rbc_.resize(n3_);
    rbf_.resize(n3_ + 1);
    pbc_.resize(n3_);
    dpc_.resize(n3_);
    for (int k = 0; k < n3_; ++k) {
        rbc_[k] = ss.rho(zc_[k]);
        pbc_[k] = cfg.law.P(rbc_[k]);
        dpc_[k] = cfg.law.dP(rbc_[k]);
    }
    for (int j = 0; j <= n3_; ++j) rbf_[j] = ss.rho(zf_[j]);

    st_.rho = Field3D(nh_, cfg.lh, zc_);
    st_.u1 = st_.rho;
    st_.u2 = st_.rho;
    st_.w = Field3D(nh_, cfg.lh, zf_);
    set_rest_state();

    fft_ = new Spectral2D(nh_, cfg.lh);
    scr_ = std::make_unique<Scratch>();
    const size_t spec = static_cast<Spectral2D*>(fft_)->spec_size();
    scr_->r.resize(spec * n3_);
    scr_->u1.resize(spec * n3_);
    scr_->u2.resize(spec * n3_);
    scr_->w.resize(spec * (n3_ + 1));
    scr_->rhs.resize(n3_);
    scr_->rnew.resize(n3_);
    scr_->divu.resize(st_.rho.size());
}

void NS3DSolver::set_rest_state() {
    for (int k = 0; k < n3_; ++k) {
        double* p = st_.rho.level_data(k);
        for (int m = 0; m < nh_ * nh_; ++m) p[m] = rbc_[k];
    }
    std::fill(st_.u1.data().begin(), st_.u1.data().end(), 0.0);
    std::fill(st_.u2.data().begin(), st_.u2.data().end(), 0.0);
    std::fill(st_.w.data().begin(), st_.w.data().end(), 0.0);
    st_.t = 0.0;
    st_.step = 0;
    diss_integral_ = 0.0;
}

std::vector<double> NS3DSolver::union_levels() const {
    std::vector<double> z(2 * n3_ + 1);
    for (int i = 0; i <= 2 * n3_; ++i) z[i] = static_cast<double>(i) / (2 * n3_);
    return z;
}

void NS3DSolver::init_from_ansatz(const AnsatzBundle& b) {
    const auto zu = union_levels();
    if (b.levels() != zu || b.nh() != nh_)
        throw std::invalid_argument("init_from_ansatz: bundle grid mismatch");
    for (int k = 0; k < n3_; ++k) {
        const int src = 2 * k + 1;
        std::copy(b.rho().level_data(src), b.rho().level_data(src) + nh_ * nh_,
                  st_.rho.level_data(k));
        std::copy(b.u()[0].level_data(src), b.u()[0].level_data(src) + nh_ * nh_,
                  st_.u1.level_data(k));
        std::copy(b.u()[1].level_data(src), b.u()[1].level_data(src) + nh_ * nh_,
                  st_.u2.level_data(k));
    }
    for (int j = 0; j <= n3_; ++j)
        std::copy(b.u()[2].level_data(2 * j), b.u()[2].level_data(2 * j) + nh_ * nh_,
                  st_.w.level_data(j));
    for (double v : st_.rho.data())
        if (!(v > 0.0)) throw std::runtime_error("init_from_ansatz: nonpositive density");
    st_.t = 0.0;
    st_.step = 0;
    diss_integral_ = 0.0;
}

double NS3DSolver::total_mass() const {
    double s = 0.0;
    for (double v : st_.rho.data()) s += v;
    return s * dx_ * dx_ * dz_;
}

double NS3DSolver::max_velocity() const {
    double m = 0.0;
    for (double v : st_.u1.data()) m = std::max(m, std::abs(v));
    for (double v : st_.u2.data()) m = std::max(m, std::abs(v));
    for (double v : st_.w.data()) m = std::max(m, std::abs(v));
    return m;
}

namespace {
inline int wrap(int i, int n) { return (i + n) % n; }
}  // namespace

void NS3DSolver::explicit_stage(double dt) {
    const int nh = nh_, n3 = n3_;
    const auto& tg = cfg_.toggles;
    const double eps2 = cfg_.eps * cfg_.eps;
    const Field3D rho0 = st_.rho, u10 = st_.u1, u20 = st_.u2, w0 = st_.w;

    auto C = [&](const Field3D& f, int i, int j, int k) -> double {
        return f.at(wrap(i, nh), wrap(j, nh), k);
    };

    // div u at cells (wide horizontal, tight vertical)
    std::vector<double>& divu = scr_->divu;
    for (int k = 0; k < n3; ++k)
        for (int j = 0; j < nh; ++j)
            for (int i = 0; i < nh; ++i) {
                const double dxu = (C(u10, i + 1, j, k) - C(u10, i - 1, j, k)) / (2.0 * dx_);
                const double dyv = (C(u20, i, j + 1, k) - C(u20, i, j - 1, k)) / (2.0 * dx_);
                const double dzw = (w0.at(i, j, k + 1) - w0.at(i, j, k)) / dz_;
                divu[rho0.idx(i, j, k)] = dxu + dyv + dzw;
            }

    // horizontal momentum at centers
    for (int k = 0; k < n3; ++k) {
        for (int j = 0; j < nh; ++j) {
            for (int i = 0; i < nh; ++i) {
                const double rho = rho0.at(i, j, k);
                double a1 = 0.0, a2 = 0.0;
                if (tg.advection) {
                    const double wc = 0.5 * (w0.at(i, j, k) + w0.at(i, j, k + 1));
                    auto dzc = [&](const Field3D& f) {
                        const double fp = (k + 1 < n3) ? f.at(i, j, k + 1) : -f.at(i, j, k);
                        const double fm = (k - 1 >= 0) ? f.at(i, j, k - 1) : -f.at(i, j, k);
                        return (fp - fm) / (2.0 * dz_);
                    };
                    a1 = u10.at(i, j, k) * (C(u10, i + 1, j, k) - C(u10, i - 1, j, k)) /
                             (2.0 * dx_) +
                         u20.at(i, j, k) * (C(u10, i, j + 1, k) - C(u10, i, j - 1, k)) /
                             (2.0 * dx_) +
                         wc * dzc(u10);
                    a2 = u10.at(i, j, k) * (C(u20, i + 1, j, k) - C(u20, i - 1, j, k)) /
                             (2.0 * dx_) +
                         u20.at(i, j, k) * (C(u20, i, j + 1, k) - C(u20, i, j - 1, k)) /
                             (2.0 * dx_) +
                         wc * dzc(u20);
                }
                double v1 = 0.0, v2 = 0.0;
                if (tg.viscosity) {
                    auto lapH = [&](const Field3D& f) {
                        return (C(f, i + 1, j, k) + C(f, i - 1, j, k) + C(f, i, j + 1, k) +
                                C(f, i, j - 1, k) - 4.0 * f.at(i, j, k)) /
                               (dx_ * dx_);
                    };
                    auto d2z = [&](const Field3D& f) {
                        const double fp = (k + 1 < n3) ? f.at(i, j, k + 1) : -f.at(i, j, k);
                        const double fm = (k - 1 >= 0) ? f.at(i, j, k - 1) : -f.at(i, j, k);
                        return (fp - 2.0 * f.at(i, j, k) + fm) / (dz_ * dz_);
                    };
                    const double ddivx =
                        (divu[rho0.idx(wrap(i + 1, nh), j, k)] -
                         divu[rho0.idx(wrap(i - 1, nh), j, k)]) /
                        (2.0 * dx_);
                    const double ddivy =
                        (divu[rho0.idx(i, wrap(j + 1, nh), k)] -
                         divu[rho0.idx(i, wrap(j - 1, nh), k)]) /
                        (2.0 * dx_);
                    v1 = (cfg_.visc.mu * lapH(u10) + cfg_.visc.eps_visc * d2z(u10) +
                          cfg_.visc.lambda * ddivx) /
                         rho;
                    v2 = (cfg_.visc.mu * lapH(u20) + cfg_.visc.eps_visc * d2z(u20) +
                          cfg_.visc.lambda * ddivy) /
                         rho;
                }
                double p1 = 0.0, p2 = 0.0;
                if (tg.pressure) {
                    auto pd = [&](int ii, int jj) {
                        return cfg_.law.P(C(rho0, ii, jj, k)) - pbc_[k];
                    };
                    auto lin = [&](int ii, int jj) {
                        return dpc_[k] * (C(rho0, ii, jj, k) - rbc_[k]);
                    };
                    const double gradPd_x = (pd(i + 1, j) - pd(i - 1, j)) / (2.0 * dx_);
                    const double gradPd_y = (pd(i, j + 1) - pd(i, j - 1)) / (2.0 * dx_);
                    const double gradL_x = (lin(i + 1, j) - lin(i - 1, j)) / (2.0 * dx_);
                    const double gradL_y = (lin(i, j + 1) - lin(i, j - 1)) / (2.0 * dx_);
                    p1 = (gradPd_x / rho - gradL_x / rbc_[k]) / eps2;
                    p2 = (gradPd_y / rho - gradL_y / rbc_[k]) / eps2;
                }
                st_.u1.at(i, j, k) += dt * (-a1 + v1 - p1);
                st_.u2.at(i, j, k) += dt * (-a2 + v2 - p2);
            }
        }
    }

    // vertical momentum at interior faces
    for (int jf = 1; jf < n3; ++jf) {
        for (int j = 0; j < nh; ++j) {
            for (int i = 0; i < nh; ++i) {
                const double rf = 0.5 * (rho0.at(i, j, jf - 1) + rho0.at(i, j, jf));
                double adv = 0.0;
                if (tg.advection) {
                    const double u1f =
                        0.5 * (u10.at(i, j, jf - 1) + u10.at(i, j, jf));
                    const double u2f =
                        0.5 * (u20.at(i, j, jf - 1) + u20.at(i, j, jf));
                    const double dwx =
                        (C(w0, i + 1, j, jf) - C(w0, i - 1, j, jf)) / (2.0 * dx_);
                    const double dwy =
                        (C(w0, i, j + 1, jf) - C(w0, i, j - 1, jf)) / (2.0 * dx_);
                    const double dwz = (w0.at(i, j, jf + 1) - w0.at(i, j, jf - 1)) / (2.0 * dz_);
                    adv = u1f * dwx + u2f * dwy + w0.at(i, j, jf) * dwz;
                }
                double visc = 0.0;
                if (tg.viscosity) {
                    const double lapH =
                        (C(w0, i + 1, j, jf) + C(w0, i - 1, j, jf) + C(w0, i, j + 1, jf) +
                         C(w0, i, j - 1, jf) - 4.0 * w0.at(i, j, jf)) /
                        (dx_ * dx_);
                    const double d2z =
                        (w0.at(i, j, jf + 1) - 2.0 * w0.at(i, j, jf) + w0.at(i, j, jf - 1)) /
                        (dz_ * dz_);
                    const double ddivz = (divu[rho0.idx(i, j, jf)] -
                                          divu[rho0.idx(i, j, jf - 1)]) /
                                         dz_;
                    visc = (cfg_.visc.mu * lapH + cfg_.visc.eps_visc * d2z +
                            cfg_.visc.lambda * ddivz) /
                           rf;
                }
                double prem = 0.0;
                if (tg.pressure) {
                    const double pd_hi = cfg_.law.P(rho0.at(i, j, jf)) - pbc_[jf];
                    const double pd_lo = cfg_.law.P(rho0.at(i, j, jf - 1)) - pbc_[jf - 1];
                    const double lin_hi = dpc_[jf] * (rho0.at(i, j, jf) - rbc_[jf]);
                    const double lin_lo = dpc_[jf - 1] * (rho0.at(i, j, jf - 1) - rbc_[jf - 1]);
                    const double drf = 0.5 * ((rho0.at(i, j, jf - 1) - rbc_[jf - 1]) +
                                              (rho0.at(i, j, jf) - rbc_[jf]));
                    prem = (((pd_hi - pd_lo) / dz_ + drf) / rf -
                            ((lin_hi - lin_lo) / dz_ + drf) / rbf_[jf]) /
                           eps2;
                }
                st_.w.at(i, j, jf) += dt * (-adv + visc - prem);
            }
        }
    }

    // upwind transport of the density deviation (conservative)
    if (tg.mass_transport) {
        Field3D drho = rho0;
        for (int k = 0; k < n3; ++k)
            for (int m = 0; m < nh * nh; ++m) drho.level_data(k)[m] -= rbc_[k];
        for (int k = 0; k < n3; ++k) {
            for (int j = 0; j < nh; ++j) {
                for (int i = 0; i < nh; ++i) {
                    // x-faces at i+-1/2
                    auto fluxx = [&](int ii) {
                        const double uf = 0.5 * (C(u10, ii, j, k) + C(u10, ii + 1, j, k));
                        const double up =
                            (uf > 0.0) ? C(drho, ii, j, k) : C(drho, ii + 1, j, k);
                        return uf * up;
                    };
                    auto fluxy = [&](int jj) {
                        const double vf = 0.5 * (C(u20, i, jj, k) + C(u20, i, jj + 1, k));
                        const double up =
                            (vf > 0.0) ? C(drho, i, jj, k) : C(drho, i, jj + 1, k);
                        return vf * up;
                    };
                    auto fluxz = [&](int jj) {  // face index jj between cells jj-1, jj
                        if (jj == 0 || jj == n3) return 0.0;
                        const double wf = w0.at(i, j, jj);
                        const double up =
                            (wf > 0.0) ? drho.at(i, j, jj - 1) : drho.at(i, j, jj);
                        return wf * up;
                    };
                    const double div = (fluxx(i) - fluxx(i - 1)) / dx_ +
                                       (fluxy(j) - fluxy(j - 1)) / dx_ +
                                       (fluxz(k + 1) - fluxz(k)) / dz_;
                    st_.rho.at(i, j, k) -= dt * div;
                }
            }
        }
    }
}

void NS3DSolver::coriolis_stage(double dt) {
    if (!cfg_.toggles.coriolis) return;
    const double c = std::cos(dt / cfg_.eps), s = std::sin(dt / cfg_.eps);
    for (size_t m = 0; m < st_.u1.size(); ++m) {
        const double a = st_.u1.data()[m], b = st_.u2.data()[m];
        st_.u1.data()[m] = c * a + s * b;
        st_.u2.data()[m] = -s * a + c * b;
    }
}

void NS3DSolver::build_tridiag(double dt) {
    auto& T = tri_;
    const Spectral2D& sp = *static_cast<Spectral2D*>(fft_);
    const size_t nmode = sp.spec_size();
    const double a = 0.5 * dt;
    const double a2e = a * a / (cfg_.eps * cfg_.eps);

    T.s2.resize(nmode);
    for (int j = 0; j < nh_; ++j) {
        const double sy = std::sin(sp.ky(j) * dx_) / dx_;
        for (int i = 0; i < sp.nkx(); ++i) {
            const double sx = std::sin(sp.kx(i) * dx_) / dx_;
            T.s2[sp.sidx(i, j)] = sx * sx + sy * sy;
        }
    }
    // mode-independent vertical part of T(r) = |s|^2 Pc r - Dz G(r):
    // assemble the tridiagonal (lo, di, up) of -Dz G
    std::vector<double> lo(n3_, 0.0), di(n3_, 0.0), up(n3_, 0.0);
    for (int k = 0; k < n3_; ++k) {
        if (k <= n3_ - 2) {  // face k+1 interior
            up[k] += -(dpc_[k + 1] / dz_ + 0.5) / dz_;
            di[k] += (dpc_[k] / dz_ - 0.5) / dz_;
        }
        if (k >= 1) {  // face k interior
            di[k] += (dpc_[k] / dz_ + 0.5) / dz_;
            lo[k] += (-dpc_[k - 1] / dz_ + 0.5) / dz_;
        }
    }
    // factor M = I + a2e (|s|^2 Pc + [lo,di,up]) per mode, Thomas without
    // pivoting (diagonally dominant for the parameters of interest)
    T.low.assign(nmode * n3_, 0.0);
    T.diag.assign(nmode * n3_, 0.0);
    T.up.assign(nmode * n3_, 0.0);
    for (size_t m = 0; m < nmode; ++m) {
        for (int k = 0; k < n3_; ++k) {
            T.diag[m * n3_ + k] = 1.0 + a2e * (T.s2[m] * dpc_[k] + di[k]);
            T.low[m * n3_ + k] = a2e * lo[k];
            T.up[m * n3_ + k] = a2e * up[k];
        }
        // forward elimination factors stored in place
        for (int k = 1; k < n3_; ++k) {
            const cplx l = T.low[m * n3_ + k] / T.diag[m * n3_ + k - 1];
            T.low[m * n3_ + k] = l;
            T.diag[m * n3_ + k] -= l * T.up[m * n3_ + k - 1];
        }
    }
    T.built = true;
    T.dt = dt;
}

void NS3DSolver::acoustic_stage(double dt) {
    if (!cfg_.toggles.pressure) return;
    if (!tri_.built || tri_.dt != dt) build_tridiag(dt);
    const Spectral2D& sp = *static_cast<Spectral2D*>(fft_);
    const size_t nmode = sp.spec_size();
    const double a = 0.5 * dt;
    const double ae2 = a / (cfg_.eps * cfg_.eps);

    // forward transforms, level by level; r = rho - rho_bar
    {
        Field2D lvl(nh_, cfg_.lh);
        for (int k = 0; k < n3_; ++k) {
            for (int m = 0; m < nh_ * nh_; ++m)
                lvl.data()[m] = st_.rho.level_data(k)[m] - rbc_[k];
            sp.forward(lvl.data().data(), scr_->r.data() + k * nmode);
            sp.forward(st_.u1.level_data(k), scr_->u1.data() + k * nmode);
            sp.forward(st_.u2.level_data(k), scr_->u2.data() + k * nmode);
        }
        for (int j = 0; j <= n3_; ++j)
            sp.forward(st_.w.level_data(j), scr_->w.data() + j * nmode);
    }

    std::vector<cplx>& rhs = scr_->rhs;
    std::vector<cplx>& rnew = scr_->rnew;
    std::vector<cplx> gsum(n3_ + 1);

    for (int j = 0; j < nh_; ++j) {
        const double sy = std::sin(sp.ky(j) * dx_) / dx_;
        for (int i = 0; i < sp.nkx(); ++i) {
            const double sx = std::sin(sp.kx(i) * dx_) / dx_;
            const size_t m = sp.sidx(i, j);
            const cplx is1(0.0, sx), is2(0.0, sy);
            const double s2 = tri_.s2[m];

            // rhs = r - 2a [rc d + Dz(rf w)] - a^2/eps^2 T(r)
            auto G = [&](int jf, auto&& rr) -> cplx {
                if (jf == 0 || jf == n3_) return cplx{0.0, 0.0};
                return (dpc_[jf] * rr(jf) - dpc_[jf - 1] * rr(jf - 1)) / dz_ +
                       0.5 * (rr(jf - 1) + rr(jf));
            };
            auto rold = [&](int k) -> cplx { return scr_->r[k * nmode + m]; };
            for (int k = 0; k < n3_; ++k) {
                const cplx d = is1 * scr_->u1[k * nmode + m] + is2 * scr_->u2[k * nmode + m];
                const cplx dzrw = (rbf_[k + 1] * scr_->w[(k + 1) * nmode + m] -
                                   rbf_[k] * scr_->w[k * nmode + m]) /
                                  dz_;
                const cplx Tr = s2 * dpc_[k] * rold(k) - (G(k + 1, rold) - G(k, rold)) / dz_;
                rhs[k] = rold(k) - dt * (rbc_[k] * d + dzrw) - (a * a / (cfg_.eps * cfg_.eps)) * Tr;
            }
            // Thomas solve (factors precomputed)
            for (int k = 1; k < n3_; ++k) rhs[k] -= tri_.low[m * n3_ + k] * rhs[k - 1];
            rnew[n3_ - 1] = rhs[n3_ - 1] / tri_.diag[m * n3_ + n3_ - 1];
            for (int k = n3_ - 2; k >= 0; --k)
                rnew[k] = (rhs[k] - tri_.up[m * n3_ + k] * rnew[k + 1]) / tri_.diag[m * n3_ + k];

            // updates of w and u_h from the CN-averaged density
            auto ravg = [&](int k) -> cplx { return rold(k) + rnew[k]; };
            for (int jf = 1; jf < n3_; ++jf) gsum[jf] = G(jf, ravg);
            for (int jf = 1; jf < n3_; ++jf)
                scr_->w[jf * nmode + m] -= (ae2 / rbf_[jf]) * gsum[jf];
            for (int k = 0; k < n3_; ++k) {
                const cplx p = dpc_[k] * ravg(k) / rbc_[k];
                scr_->u1[k * nmode + m] -= ae2 * is1 * p;
                scr_->u2[k * nmode + m] -= ae2 * is2 * p;
                scr_->r[k * nmode + m] = rnew[k];
            }
        }
    }

    // inverse transforms
    {
        Field2D lvl(nh_, cfg_.lh);
        for (int k = 0; k < n3_; ++k) {
            sp.inverse(scr_->r.data() + k * nmode, lvl.data().data());
            for (int m = 0; m < nh_ * nh_; ++m)
                st_.rho.level_data(k)[m] = rbc_[k] + lvl.data()[m];
            sp.inverse(scr_->u1.data() + k * nmode, st_.u1.level_data(k));
            sp.inverse(scr_->u2.data() + k * nmode, st_.u2.level_data(k));
        }
        for (int jf = 1; jf < n3_; ++jf)
            sp.inverse(scr_->w.data() + jf * nmode, st_.w.level_data(jf));
    }
}

double NS3DSolver::dissipation_rate() const {
    const int nh = nh_, n3 = n3_;
    auto C = [&](const Field3D& f, int i, int j, int k) -> double {
        return f.at(wrap(i, nh), wrap(j, nh), k);
    };
    double phi = 0.0;
    for (int k = 0; k < n3; ++k) {
        for (int j = 0; j < nh; ++j) {
            for (int i = 0; i < nh; ++i) {
                auto gradh2 = [&](const Field3D& f) {
                    const double gx = (C(f, i + 1, j, k) - C(f, i - 1, j, k)) / (2.0 * dx_);
                    const double gy = (C(f, i, j + 1, k) - C(f, i, j - 1, k)) / (2.0 * dx_);
                    return gx * gx + gy * gy;
                };
                auto dzc = [&](const Field3D& f) {
                    const double fp = (k + 1 < n3) ? f.at(i, j, k + 1) : -f.at(i, j, k);
                    const double fm = (k - 1 >= 0) ? f.at(i, j, k - 1) : -f.at(i, j, k);
                    return (fp - fm) / (2.0 * dz_);
                };
                const double wc_x =
                    0.5 * ((C(st_.w, i + 1, j, k) + C(st_.w, i + 1, j, k + 1)) -
                           (C(st_.w, i - 1, j, k) + C(st_.w, i - 1, j, k + 1))) /
                    (2.0 * dx_);
                const double wc_y =
                    0.5 * ((C(st_.w, i, j + 1, k) + C(st_.w, i, j + 1, k + 1)) -
                           (C(st_.w, i, j - 1, k) + C(st_.w, i, j - 1, k + 1))) /
                    (2.0 * dx_);
                const double dzw = (st_.w.at(i, j, k + 1) - st_.w.at(i, j, k)) / dz_;
                const double du1 = (C(st_.u1, i + 1, j, k) - C(st_.u1, i - 1, j, k)) / (2.0 * dx_);
                const double dv2 = (C(st_.u2, i, j + 1, k) - C(st_.u2, i, j - 1, k)) / (2.0 * dx_);
                const double div = du1 + dv2 + dzw;
                phi += cfg_.visc.mu * (gradh2(st_.u1) + gradh2(st_.u2) + wc_x * wc_x +
                                       wc_y * wc_y) +
                       cfg_.visc.eps_visc *
                           (dzc(st_.u1) * dzc(st_.u1) + dzc(st_.u2) * dzc(st_.u2) +
                            dzw * dzw) +
                       cfg_.visc.lambda * div * div;
            }
        }
    }
    return phi * dx_ * dx_ * dz_;
}

void NS3DSolver::step() {
    const double dt = cfg_.dt;
    const double umax = max_velocity();
    if (umax * dt > cfg_.cfl * std::min(dx_, dz_))
        throw std::runtime_error("NS3D: CFL violation, reduce dt");

    const double phi0 = cfg_.toggles.viscosity ? dissipation_rate() : 0.0;
    explicit_stage(dt);
    coriolis_stage(dt);
    acoustic_stage(dt);
    const double phi1 = cfg_.toggles.viscosity ? dissipation_rate() : 0.0;
    diss_integral_ += 0.5 * dt * (phi0 + phi1);

    for (double v : st_.rho.data()) {
        if (!(v > 0.0)) throw std::runtime_error("NS3D: vacuum (nonpositive density)");
        if (!std::isfinite(v)) throw std::runtime_error("NS3D: diverged (NaN density)");
    }
    for (const Field3D* f : {&st_.u1, &st_.u2, &st_.w})
        for (double v : f->data())
            if (!std::isfinite(v)) throw std::runtime_error("NS3D: diverged (NaN velocity)");

    ++st_.step;
    st_.t = st_.step * dt;
}

void NS3DSolver::advance(double t_end) {
    const int64_t target = std::llround(t_end / cfg_.dt);
    while (st_.step < target) step();
}

EnergyLedger NS3DSolver::ledger() const {
    EnergyLedger L;
    L.t = st_.t;
    const double dV = dx_ * dx_ * dz_;
    double kin = 0.0, pot = 0.0;
    for (int k = 0; k < n3_; ++k) {
        for (int j = 0; j < nh_; ++j) {
            for (int i = 0; i < nh_; ++i) {
                const double rho = st_.rho.at(i, j, k);
                const double wc = 0.5 * (st_.w.at(i, j, k) + st_.w.at(i, j, k + 1));
                kin += 0.5 * rho *
                       (st_.u1.at(i, j, k) * st_.u1.at(i, j, k) +
                        st_.u2.at(i, j, k) * st_.u2.at(i, j, k) + wc * wc);
                pot += cfg_.law.relative_energy(rho, rbc_[k]);
            }
        }
    }
    L.kinetic = kin * dV;
    L.potential_entropy = pot * dV / (cfg_.eps * cfg_.eps);
    L.dissipation = diss_integral_;
    L.total = L.kinetic + L.potential_entropy + L.dissipation;
    return L;
}

std::vector<EnergyLedger> NS3DSolver::run_to(double t_end, int sample_every) {
    std::vector<EnergyLedger> out;
    out.push_back(ledger());
    const int64_t target = std::llround(t_end / cfg_.dt);
    while (st_.step < target) {
        step();
        if (st_.step % sample_every == 0 || st_.step == target) out.push_back(ledger());
    }
    return out;
}

NS3DSolver make_well_prepared_solver(const NS3DConfig& cfg, const QGSolver& qg) {
    NS3DSolver s(cfg);
    const StaticState ss(cfg.law, cfg.rho_bottom);
    AnsatzBundle b(ss, qg, cfg.eps, s.union_levels(), /*strict_band=*/false);
    s.init_from_ansatz(b);
    return s;
}

}  // namespace slabflow
