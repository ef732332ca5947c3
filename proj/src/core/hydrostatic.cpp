#include "hydrostatic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace slabflow {

namespace {
double static_rhs(const PressureLaw& law, double rho) {
    if (!(rho > 0.0)) throw std::runtime_error("solve_profile: vacuum reached before the top wall");
    return -rho / law.dP(rho);  // rho' = -rho / P'(rho)
}
}  // namespace

HydrostaticProfile solve_profile(const PressureLaw& law, double rho_bottom, int n3,
                                 double kappa_min) {
    if (!(rho_bottom > 0.0)) throw std::invalid_argument("solve_profile: rho_bottom must be > 0");
    if (n3 < 2) throw std::invalid_argument("solve_profile: n3 must be >= 2");

    HydrostaticProfile p;
    p.rho_bottom = rho_bottom;
    p.n3 = n3;
    p.rho.resize(n3 + 1);
    p.rho[0] = rho_bottom;

    const double h = 1.0 / n3;
    double r = rho_bottom;
    for (int k = 0; k < n3; ++k) {
        const double k1 = static_rhs(law, r);
        const double k2 = static_rhs(law, r + 0.5 * h * k1);
        const double k3 = static_rhs(law, r + 0.5 * h * k2);
        const double k4 = static_rhs(law, r + h * k3);
        r += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        if (!(r > kappa_min))
            throw std::runtime_error("solve_profile: vacuum reached before the top wall");
        p.rho[k + 1] = r;
    }
    p.kappa = *std::min_element(p.rho.begin(), p.rho.end());
    return p;
}

std::vector<double> potential(const HydrostaticProfile& p, const PressureLaw& law) {
    std::vector<double> g(p.rho.size());
    for (size_t k = 0; k < p.rho.size(); ++k) g[k] = law.dH(p.rho[k]);
    return g;
}

VerticalAverages vertical_averages(const HydrostaticProfile& p, const PressureLaw& law) {
    VerticalAverages va;
    const double h = 1.0 / p.n3;
    for (int k = 0; k <= p.n3; ++k) {
        const double w = (k == 0 || k == p.n3) ? 0.5 * h : h;
        va.avg_rho += w * p.rho[k];
        va.avg_rho_over_dP += w * p.rho[k] / law.dP(p.rho[k]);
    }
    if (!(va.avg_rho > 0.0) || !(va.avg_rho_over_dP > 0.0))
        throw std::runtime_error("vertical_averages: nonpositive average");
    return va;
}

double hydrostatic_closed_form(const PressureLaw& law, double rho_bottom, double z) {
    const double g = law.gamma(), a = law.a();
    if (g == 1.0) return rho_bottom * std::exp(-z / a);
    const double base = std::pow(rho_bottom, g - 1.0) - z * (g - 1.0) / (a * g);
    if (!(base > 0.0)) throw std::runtime_error("hydrostatic_closed_form: vacuum reached");
    return std::pow(base, 1.0 / (g - 1.0));
}

double profile_ode_residual(const HydrostaticProfile& p, const PressureLaw& law) {
    const double h = 1.0 / p.n3;
    double worst = 0.0;
    for (int k = 1; k < p.n3; ++k) {
        const double d = (p.rho[k + 1] - p.rho[k - 1]) / (2.0 * h);
        worst = std::max(worst, std::abs(law.dP(p.rho[k]) * d + p.rho[k]));
    }
    return worst;
}

void write_profile_csv(const HydrostaticProfile& p, const PressureLaw& law,
                       const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("write_profile_csv: cannot open " + path);
    std::fprintf(f, "x3,rho_bar,G\n");
    const auto g = potential(p, law);
    for (int k = 0; k <= p.n3; ++k)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", p.z(k), p.rho[k], g[k]);
    std::fclose(f);
}

}  // namespace slabflow
