#include "qg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace slabflow {

QGSolver::QGSolver(const QGParams& p) : p_(p), sp_(p.nh, p.lh) {
    p_.validate();
    qh_ = sp_.make_spec();
    nprev_ = sp_.make_spec();
}

void QGSolver::set_state(const Field2D& q0) {
    if (q0.n() != p_.nh) throw std::invalid_argument("QGSolver: grid mismatch");
    sp_.forward(q0, qh_);
    sp_.dealias(qh_.data());
    qh_[sp_.sidx(0, 0)] = 0.0;  // zero-mean stream function
    have_prev_ = false;
    t_ = 0.0;
    nstep_ = 0;
    diss_int_.fill(0.0);
}

void QGSolver::set_state_spec(const std::vector<cplx>& qh) {
    if (qh.size() != sp_.spec_size()) throw std::invalid_argument("QGSolver: spec size mismatch");
    qh_ = qh;
    sp_.dealias(qh_.data());
    qh_[sp_.sidx(0, 0)] = 0.0;
    have_prev_ = false;
    t_ = 0.0;
    nstep_ = 0;
    diss_int_.fill(0.0);
}

void QGSolver::set_single_mode(int m1, int m2, double amplitude) {
    Field2D q(p_.nh, p_.lh);
    const double k1 = 2.0 * std::numbers::pi / p_.lh * m1;
    const double k2 = 2.0 * std::numbers::pi / p_.lh * m2;
    for (int j = 0; j < p_.nh; ++j)
        for (int i = 0; i < p_.nh; ++i)
            q.at(i, j) = amplitude * std::cos(k1 * q.x(i) + k2 * q.x(j));
    set_state(q);
}

void QGSolver::set_random_band(uint64_t seed, int mode_max, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<cplx> qh = sp_.make_spec();
    for (int j = 0; j < p_.nh; ++j) {
        const int mj = (j <= p_.nh / 2) ? j : j - p_.nh;
        for (int i = 0; i <= p_.nh / 2; ++i) {
            const double m2 = static_cast<double>(i) * i + static_cast<double>(mj) * mj;
            if (m2 == 0.0 || m2 > static_cast<double>(mode_max) * mode_max) continue;
            const double amp = amplitude / m2;
            const double ph = phase(rng);
            qh[sp_.sidx(i, j)] = amp * cplx(std::cos(ph), std::sin(ph));
        }
    }
    // enforce Hermitian symmetry on the i = 0 column so q is real
    for (int j = 1; j < p_.nh / 2; ++j)
        qh[sp_.sidx(0, p_.nh - j)] = std::conj(qh[sp_.sidx(0, j)]);
    qh[sp_.sidx(0, p_.nh / 2)] = cplx(qh[sp_.sidx(0, p_.nh / 2)].real(), 0.0);
    Field2D q(p_.nh, p_.lh);
    sp_.inverse(qh, q);
    set_state(q);
}

std::vector<cplx> QGSolver::jacobian(const std::vector<cplx>& qh) const {
    // J = grad_perp Q . grad Lap Q = -d2Q d1(LapQ) + d1Q d2(LapQ), dealiased.
    std::vector<cplx> wx = qh, wy = qh, lx = qh, ly = qh;
    sp_.apply_ddx(wx.data());
    sp_.apply_ddy(wy.data());
    sp_.apply_laplacian(lx.data());
    ly = lx;
    sp_.apply_ddx(lx.data());
    sp_.apply_ddy(ly.data());

    Field2D fx(p_.nh, p_.lh), fy(p_.nh, p_.lh), gx(p_.nh, p_.lh), gy(p_.nh, p_.lh);
    sp_.inverse(wx, fx);
    sp_.inverse(wy, fy);
    sp_.inverse(lx, gx);
    sp_.inverse(ly, gy);

    Field2D j(p_.nh, p_.lh);
    for (size_t m = 0; m < j.size(); ++m)
        j.data()[m] = -fy.data()[m] * gx.data()[m] + fx.data()[m] * gy.data()[m];
    std::vector<cplx> out;
    sp_.forward(j, out);
    sp_.dealias(out.data());
    out[sp_.sidx(0, 0)] = 0.0;
    return out;
}

std::vector<cplx> QGSolver::rhs(const std::vector<cplx>& qh) const {
    std::vector<cplx> n = jacobian(qh);
    std::vector<cplx> out(sp_.spec_size());
    for (int j = 0; j < p_.nh; ++j) {
        const double ky = sp_.ky(j);
        for (int i = 0; i < sp_.nkx(); ++i) {
            const double k2 = sp_.kx(i) * sp_.kx(i) + ky * ky;
            const size_t m = sp_.sidx(i, j);
            const double A = p_.beta + p_.m * k2;
            const double D = p_.mu * k2 * k2 + p_.damp * k2;
            out[m] = (p_.m * n[m] - D * qh[m]) / A;
        }
    }
    sp_.dealias(out.data());
    out[sp_.sidx(0, 0)] = 0.0;
    return out;
}

std::vector<cplx> QGSolver::rhs_tangent(const std::vector<cplx>& qh,
                                        const std::vector<cplx>& vh) const {
    // d/dQ [J(Q)] v = grad_perp v . grad Lap Q + grad_perp Q . grad Lap v
    auto mixed = [&](const std::vector<cplx>& ah, const std::vector<cplx>& bh) {
        std::vector<cplx> ax = ah, ay = ah, bx = bh, by = bh;
        sp_.apply_ddx(ax.data());
        sp_.apply_ddy(ay.data());
        sp_.apply_laplacian(bx.data());
        by = bx;
        sp_.apply_ddx(bx.data());
        sp_.apply_ddy(by.data());
        Field2D fax(p_.nh, p_.lh), fay(p_.nh, p_.lh), fbx(p_.nh, p_.lh), fby(p_.nh, p_.lh);
        sp_.inverse(ax, fax);
        sp_.inverse(ay, fay);
        sp_.inverse(bx, fbx);
        sp_.inverse(by, fby);
        Field2D j(p_.nh, p_.lh);
        for (size_t m = 0; m < j.size(); ++m)
            j.data()[m] = -fay.data()[m] * fbx.data()[m] + fax.data()[m] * fby.data()[m];
        std::vector<cplx> out;
        sp_.forward(j, out);
        sp_.dealias(out.data());
        return out;
    };
    std::vector<cplx> jv = mixed(vh, qh);
    const std::vector<cplx> jq = mixed(qh, vh);
    for (size_t m = 0; m < jv.size(); ++m) jv[m] += jq[m];

    std::vector<cplx> out(sp_.spec_size());
    for (int j = 0; j < p_.nh; ++j) {
        const double ky = sp_.ky(j);
        for (int i = 0; i < sp_.nkx(); ++i) {
            const double k2 = sp_.kx(i) * sp_.kx(i) + ky * ky;
            const size_t m = sp_.sidx(i, j);
            const double A = p_.beta + p_.m * k2;
            const double D = p_.mu * k2 * k2 + p_.damp * k2;
            out[m] = (p_.m * jv[m] - D * vh[m]) / A;
        }
    }
    sp_.dealias(out.data());
    out[sp_.sidx(0, 0)] = 0.0;
    return out;
}

double QGSolver::max_velocity() const {
    std::vector<cplx> wx = qh_, wy = qh_;
    sp_.apply_ddx(wx.data());
    sp_.apply_ddy(wy.data());
    Field2D fx(p_.nh, p_.lh), fy(p_.nh, p_.lh);
    sp_.inverse(wx, fx);
    sp_.inverse(wy, fy);
    double m = 0.0;
    for (size_t s = 0; s < fx.size(); ++s)
        m = std::max(m, std::hypot(fx.data()[s], fy.data()[s]));
    return m;
}

double QGSolver::grad_norm_sq(int j) const {
    // Parseval on the r2c layout: modes with 0 < i < n/2 appear twice.
    double s = 0.0;
    for (int jj = 0; jj < p_.nh; ++jj) {
        const double ky = sp_.ky(jj);
        for (int i = 0; i < sp_.nkx(); ++i) {
            const double k2 = sp_.kx(i) * sp_.kx(i) + ky * ky;
            const double mult = (i == 0 || i == p_.nh / 2) ? 1.0 : 2.0;
            s += mult * std::pow(k2, j) * std::norm(qh_[sp_.sidx(i, jj)]);
        }
    }
    return s * p_.lh * p_.lh;
}

double QGSolver::diss_pair(int j) const { return grad_norm_sq(j + 1) + grad_norm_sq(j + 2); }

void QGSolver::step() {
    const double dx = p_.lh / p_.nh;
    const double umax = max_velocity();
    if (umax > 0.0 && p_.dt > p_.cfl * dx / umax)
        throw std::runtime_error("QGSolver: CFL violation, reduce dt");

    std::array<double, 4> diss_old;
    for (int j = 0; j < 4; ++j) diss_old[j] = diss_pair(j);

    std::vector<cplx> n = jacobian(qh_);
    for (auto& v : n) v *= p_.m;
    if (!have_prev_) {
        nprev_ = n;
        have_prev_ = true;
    }

    for (int j = 0; j < p_.nh; ++j) {
        const double ky = sp_.ky(j);
        for (int i = 0; i < sp_.nkx(); ++i) {
            const double k2 = sp_.kx(i) * sp_.kx(i) + ky * ky;
            const size_t m = sp_.sidx(i, j);
            const double A = p_.beta + p_.m * k2;
            const double D = p_.mu * k2 * k2 + p_.damp * k2;
            const cplx nab = 1.5 * n[m] - 0.5 * nprev_[m];
            qh_[m] = ((A - 0.5 * p_.dt * D) * qh_[m] + p_.dt * nab) / (A + 0.5 * p_.dt * D);
        }
    }
    sp_.dealias(qh_.data());
    qh_[sp_.sidx(0, 0)] = 0.0;
    nprev_ = std::move(n);

    for (size_t m = 0; m < qh_.size(); ++m)
        if (!std::isfinite(qh_[m].real()) || !std::isfinite(qh_[m].imag()))
            throw std::runtime_error("QGSolver: solution diverged (NaN)");

    for (int j = 0; j < 4; ++j)
        diss_int_[j] += 0.5 * p_.dt * (diss_old[j] + diss_pair(j));

    ++nstep_;
    t_ = nstep_ * p_.dt;
}

void QGSolver::advance(double t_end) {
    const int64_t target = std::llround(t_end / p_.dt);
    while (nstep_ < target) step();
}

Field2D QGSolver::q() const {
    Field2D out(p_.nh, p_.lh);
    sp_.inverse(qh_, out);
    return out;
}

QGEnergy QGSolver::energy(int order) const {
    if (order < 1 || order > 4) throw std::invalid_argument("QGSolver::energy: order must be 1..4");
    QGEnergy e;
    e.norms_sq.resize(order + 1);
    for (int j = 0; j <= order; ++j) e.norms_sq[j] = grad_norm_sq(j);
    e.running_diss.assign(diss_int_.begin(), diss_int_.begin() + order);
    for (int j = 0; j < order; ++j) {
        e.hierarchy_sum += e.norms_sq[j] + e.norms_sq[j + 1];
        e.monitored += e.running_diss[j];
    }
    e.monitored += e.hierarchy_sum;
    return e;
}

void QGSolver::recover_velocity_pressure(VectorField2D& u, Field2D& pi) const {
    std::vector<cplx> ux = qh_, uy = qh_;
    sp_.apply_ddy(ux.data());
    for (auto& v : ux) v = -v;
    sp_.apply_ddx(uy.data());
    u = {Field2D(p_.nh, p_.lh), Field2D(p_.nh, p_.lh)};
    sp_.inverse(ux, u[0]);
    sp_.inverse(uy, u[1]);

    // advective term u . grad u, dealiased
    Field2D a1(p_.nh, p_.lh), a2(p_.nh, p_.lh);
    {
        const Field2D u1x = sp_.ddx(u[0]), u1y = sp_.ddy(u[0]);
        const Field2D u2x = sp_.ddx(u[1]), u2y = sp_.ddy(u[1]);
        for (size_t m = 0; m < a1.size(); ++m) {
            a1.data()[m] = u[0].data()[m] * u1x.data()[m] + u[1].data()[m] * u1y.data()[m];
            a2.data()[m] = u[0].data()[m] * u2x.data()[m] + u[1].data()[m] * u2y.data()[m];
        }
    }
    std::vector<cplx> a1h, a2h;
    sp_.forward(a1, a1h);
    sp_.forward(a2, a2h);
    sp_.dealias(a1h.data());
    sp_.dealias(a2h.data());

    // -Lap pi = m div(u . grad u)
    std::vector<cplx> rhs = sp_.make_spec();
    for (int j = 0; j < p_.nh; ++j) {
        const double ky = sp_.ky(j);
        for (int i = 0; i < sp_.nkx(); ++i) {
            const size_t m = sp_.sidx(i, j);
            rhs[m] = p_.m * cplx(0.0, 1.0) * (sp_.kx(i) * a1h[m] + ky * a2h[m]);
        }
    }
    sp_.apply_inv_neg_laplacian(rhs.data());
    pi = Field2D(p_.nh, p_.lh);
    sp_.inverse(rhs, pi);
}

double QGSolver::momentum_residual() const {
    // residual of d/dt[(m - beta Lap^{-1}) u] + m u.grad u - mu Lap u
    //             + damp u + grad pi = 0 with u = grad_perp Q.
    const std::vector<cplx> qdot = rhs(qh_);

    VectorField2D u;
    Field2D pi;
    recover_velocity_pressure(u, pi);

    // advective term again (dealiased) and all linear pieces, spectral.
    Field2D a1(p_.nh, p_.lh), a2(p_.nh, p_.lh);
    {
        const Field2D u1x = sp_.ddx(u[0]), u1y = sp_.ddy(u[0]);
        const Field2D u2x = sp_.ddx(u[1]), u2y = sp_.ddy(u[1]);
        for (size_t m = 0; m < a1.size(); ++m) {
            a1.data()[m] = u[0].data()[m] * u1x.data()[m] + u[1].data()[m] * u1y.data()[m];
            a2.data()[m] = u[0].data()[m] * u2x.data()[m] + u[1].data()[m] * u2y.data()[m];
        }
    }
    std::vector<cplx> a1h, a2h;
    sp_.forward(a1, a1h);
    sp_.forward(a2, a2h);
    sp_.dealias(a1h.data());
    sp_.dealias(a2h.data());

    std::vector<cplx> pih;
    sp_.forward(pi, pih);

    double worst = 0.0;
    std::vector<cplx> r1(sp_.spec_size()), r2(sp_.spec_size());
    for (int j = 0; j < p_.nh; ++j) {
        const double ky = sp_.ky(j);
        for (int i = 0; i < sp_.nkx(); ++i) {
            const double kx = sp_.kx(i);
            const double k2 = kx * kx + ky * ky;
            const size_t m = sp_.sidx(i, j);
            const cplx udot1 = cplx(0.0, -ky) * qdot[m];
            const cplx udot2 = cplx(0.0, kx) * qdot[m];
            const cplx u1 = cplx(0.0, -ky) * qh_[m];
            const cplx u2 = cplx(0.0, kx) * qh_[m];
            const double tcoef = p_.m + (k2 > 0.0 ? p_.beta / k2 : 0.0);
            r1[m] = tcoef * udot1 + p_.m * a1h[m] + p_.mu * k2 * u1 + p_.damp * u1 +
                    cplx(0.0, kx) * pih[m];
            r2[m] = tcoef * udot2 + p_.m * a2h[m] + p_.mu * k2 * u2 + p_.damp * u2 +
                    cplx(0.0, ky) * pih[m];
        }
    }
    sp_.dealias(r1.data());
    sp_.dealias(r2.data());
    Field2D f1(p_.nh, p_.lh), f2(p_.nh, p_.lh);
    sp_.inverse(r1, f1);
    sp_.inverse(r2, f2);
    for (size_t m = 0; m < f1.size(); ++m)
        worst = std::max({worst, std::abs(f1.data()[m]), std::abs(f2.data()[m])});
    return worst;
}

}  // namespace slabflow
