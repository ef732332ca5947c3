#include "static_state.hpp"

#include <cmath>
#include <stdexcept>

#include "hydrostatic.hpp"

namespace slabflow {

StaticState::StaticState(const PressureLaw& law, double rho_bottom)
    : law_(law), rho_bottom_(rho_bottom) {
    if (!(rho_bottom > 0.0)) throw std::invalid_argument("StaticState: rho_bottom must be > 0");
    hydrostatic_closed_form(law, rho_bottom, 1.0);  // throws if vacuum inside [0,1]
}

double StaticState::rho(double z) const { return hydrostatic_closed_form(law_, rho_bottom_, z); }

double StaticState::drho(double z) const {
    const double r = rho(z);
    return -r / law_.dP(r);
}

double StaticState::d2rho(double z) const {
    const double r = rho(z), dp = law_.dP(r), d2p = law_.d2P(r);
    const double r1 = -r / dp;
    return r1 * (r * d2p - dp) / (dp * dp);
}

double StaticState::g(double z) const {
    const double r = rho(z);
    return r / law_.dP(r);
}

double StaticState::dg(double z) const {
    const double r = rho(z), dp = law_.dP(r), d2p = law_.d2P(r);
    const double r1 = -r / dp;
    return r1 * (dp - r * d2p) / (dp * dp);
}

double StaticState::d2g(double z) const {
    const double r = rho(z), dp = law_.dP(r), d2p = law_.d2P(r), d3p = law_.d3P(r);
    const double r1 = -r / dp;
    const double r2 = r1 * (r * d2p - dp) / (dp * dp);
    return r2 * (dp - r * d2p) / (dp * dp) +
           r1 * r1 * (-r * d3p * dp - 2.0 * d2p * (dp - r * d2p)) / (dp * dp * dp);
}

double StaticState::inv_dP(double z) const { return 1.0 / law_.dP(rho(z)); }

double StaticState::dinv_dP(double z) const {
    const double r = rho(z), dp = law_.dP(r);
    return -law_.d2P(r) * drho(z) / (dp * dp);
}

double StaticState::d2inv_dP(double z) const {
    const double r = rho(z), dp = law_.dP(r), d2p = law_.d2P(r);
    const double r1 = drho(z), r2 = d2rho(z);
    return -(law_.d3P(r) * r1 * r1 + d2p * r2) / (dp * dp) +
           2.0 * d2p * d2p * r1 * r1 / (dp * dp * dp);
}

double StaticState::psi_coef(double z) const {
    const double r = rho(z);
    return (law_.d2P(r) * drho(z) + 1.0) / law_.dP(r);
}

double StaticState::psi_rhs(double z) const {
    const double r = rho(z);
    const double num = law_.d3P(r) * drho(z) * g(z) * g(z) + 2.0 * law_.d2P(r) * g(z) * dg(z);
    return -num / (2.0 * law_.dP(r));
}

namespace {
// one RK4 step of y' = rhs(z) - c(z) y
template <typename RHS, typename COEF>
double rk4_linear(double z, double y, double h, RHS rhs, COEF coef) {
    auto f = [&](double zz, double yy) { return rhs(zz) - coef(zz) * yy; };
    const double k1 = f(z, y);
    const double k2 = f(z + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(z + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(z + h, y + h * k3);
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
}
}  // namespace

double StaticState::psi_value(double z) const {
    auto rhs = [&](double zz) { return psi_rhs(zz); };
    auto coef = [&](double zz) { return psi_coef(zz); };
    const int n = std::max(1, static_cast<int>(std::ceil(z * 1024.0)));
    const double h = z / n;
    double y = 0.0;
    for (int i = 0; i < n; ++i) y = rk4_linear(i * h, y, h, rhs, coef);
    return y;
}

StaticState::Samples StaticState::sample(const std::vector<double>& levels) const {
    Samples s;
    s.z = levels;
    const size_t n = levels.size();
    for (Profile* p : {&s.rho, &s.g, &s.inv_rho, &s.inv_dP, &s.c4, &s.psi}) {
        p->v.resize(n);
        p->d1.resize(n);
        p->d2.resize(n);
    }

    // psi by RK4 through the level set with internal substeps
    auto rhs = [&](double zz) { return psi_rhs(zz); };
    auto coef = [&](double zz) { return psi_coef(zz); };
    double y = 0.0, zcur = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double zt = levels[k];
        if (zt < zcur - 1e-14 || zt > 1.0 + 1e-14)
            throw std::invalid_argument("StaticState::sample: levels must be sorted in [0,1]");
        const double span = zt - zcur;
        if (span > 0.0) {
            const int steps = std::max(1, static_cast<int>(std::ceil(span * 1024.0)));
            const double h = span / steps;
            for (int i = 0; i < steps; ++i) y = rk4_linear(zcur + i * h, y, h, rhs, coef);
            zcur = zt;
        }
        s.psi.v[k] = y;
    }

    for (size_t k = 0; k < n; ++k) {
        const double z = levels[k];
        const double r = rho(z), r1 = drho(z), r2 = d2rho(z);
        const double dp = law_.dP(r), d2p = law_.d2P(r), d3p = law_.d3P(r), d4p = law_.d4P(r);
        const double gv = g(z), g1 = dg(z), g2 = d2g(z);

        s.rho.v[k] = r;
        s.rho.d1[k] = r1;
        s.rho.d2[k] = r2;
        s.g.v[k] = gv;
        s.g.d1[k] = g1;
        s.g.d2[k] = g2;
        s.inv_rho.v[k] = 1.0 / r;
        s.inv_rho.d1[k] = -r1 / (r * r);
        s.inv_rho.d2[k] = -r2 / (r * r) + 2.0 * r1 * r1 / (r * r * r);
        s.inv_dP.v[k] = 1.0 / dp;
        s.inv_dP.d1[k] = dinv_dP(z);
        s.inv_dP.d2[k] = d2inv_dP(z);

        const double psi = s.psi.v[k];
        const double num = d3p * r1 * gv * gv + 2.0 * d2p * gv * g1;
        const double num1 = d4p * r1 * r1 * gv * gv + d3p * r2 * gv * gv +
                            4.0 * d3p * r1 * gv * g1 + 2.0 * d2p * g1 * g1 +
                            2.0 * d2p * gv * g2;
        const double c = (d2p * r1 + 1.0) / dp;
        const double c1 = ((d3p * r1 * r1 + d2p * r2) * dp - (d2p * r1 + 1.0) * d2p * r1) /
                          (dp * dp);
        const double rhs_v = -num / (2.0 * dp);
        const double rhs1 = -(num1 * dp - num * d2p * r1) / (2.0 * dp * dp);
        const double psi1 = rhs_v - c * psi;
        const double psi2 = rhs1 - c1 * psi - c * psi1;
        s.psi.d1[k] = psi1;
        s.psi.d2[k] = psi2;

        const double N = dp * psi + 0.5 * d2p * gv * gv;
        const double N1 = d2p * r1 * psi + dp * psi1 + 0.5 * num;
        const double N2 = (d3p * r1 * r1 + d2p * r2) * psi + 2.0 * d2p * r1 * psi1 + dp * psi2 +
                          0.5 * num1;
        s.c4.v[k] = N / r;
        s.c4.d1[k] = (N1 * r - N * r1) / (r * r);
        s.c4.d2[k] = N2 / r - 2.0 * N1 * r1 / (r * r) - N * r2 / (r * r) +
                     2.0 * N * r1 * r1 / (r * r * r);
    }
    return s;
}

}  // namespace slabflow
