#include "entropy_diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slabflow {

double default_sigma(const std::vector<double>& rho_bar_centers) {
    double inf = rho_bar_centers.front();
    for (double v : rho_bar_centers) inf = std::min(inf, v);
    return 0.5 * std::min(inf, 2.0 / 3.0);
}

EssResDecomposition decompose_ess_res(const Field3D& rho,
                                      const std::vector<double>& rho_bar_centers, double sigma) {
    double inf = rho_bar_centers.front();
    for (double v : rho_bar_centers) inf = std::min(inf, v);
    if (!(sigma > 0.0) || !(sigma < inf) || !(sigma < 2.0 / 3.0))
        throw std::invalid_argument("decompose_ess_res: sigma outside (0, min(inf rho_bar, 2/3))");
    if (rho.nlev() != static_cast<int>(rho_bar_centers.size()))
        throw std::invalid_argument("decompose_ess_res: level mismatch");

    EssResDecomposition d;
    d.res_mask.assign(rho.size(), 0);
    const int nh = rho.nh();
    const double dv = rho.dx() * rho.dx() * (1.0 / rho.nlev());
    for (int k = 0; k < rho.nlev(); ++k) {
        const double* p = rho.level_data(k);
        for (int m = 0; m < nh * nh; ++m) {
            const bool res = std::abs(p[m] - rho_bar_centers[k]) >= sigma;
            d.res_mask[static_cast<size_t>(k) * nh * nh + m] = res ? 1 : 0;
            (res ? d.measure_res : d.measure_ess) += dv;
        }
    }
    d.measure_total = d.measure_res + d.measure_ess;
    return d;
}

EntropyReport entropy_report(const Flow3DState& st, const Flow3DState& app,
                             const PressureLaw& law, double eps,
                             const std::vector<double>& rho_bar_centers, double sigma,
                             double dx, double dz, double accumulated_dissipation) {
    if (!st.rho.same_grid(app.rho) || !st.w.same_grid(app.w))
        throw std::invalid_argument("entropy_report: grid mismatch");
    const int nh = st.rho.nh(), n3 = st.rho.nlev();
    const double dV = dx * dx * dz;
    EntropyReport r;
    r.dissipation_error = accumulated_dissipation;

    const auto dec = decompose_ess_res(st.rho, rho_bar_centers, sigma);
    r.residual_measure = dec.measure_res;

    double relent = 0.0, kin = 0.0, res_mass = 0.0, drho_l1 = 0.0, drho_lg = 0.0;
    const double gamma = law.gamma();
    for (int k = 0; k < n3; ++k) {
        for (int j = 0; j < nh; ++j) {
            for (int i = 0; i < nh; ++i) {
                const size_t m = st.rho.idx(i, j, k);
                const double rho = st.rho.data()[m];
                const double rapp = app.rho.data()[m];
                relent += law.relative_energy(rho, rapp);
                const double d1 = st.u1.data()[m] - app.u1.data()[m];
                const double d2 = st.u2.data()[m] - app.u2.data()[m];
                const double wc = 0.5 * (st.w.at(i, j, k) + st.w.at(i, j, k + 1)) -
                                  0.5 * (app.w.at(i, j, k) + app.w.at(i, j, k + 1));
                kin += rho * (d1 * d1 + d2 * d2 + wc * wc);
                if (dec.res_mask[m]) {
                    res_mass += std::pow(rho, gamma);
                    const double ad = std::abs(rho - rapp);
                    drho_l1 += ad;
                    drho_lg += std::pow(ad, gamma);
                }
            }
        }
    }
    r.rel_entropy = relent * dV;
    r.kinetic_error = kin * dV;
    r.theorem_functional = r.kinetic_error + r.rel_entropy / (eps * eps);
    r.residual_mass_lgamma = std::pow(res_mass * dV, 1.0 / gamma);
    r.residual_drho_l1 = drho_l1 * dV;
    r.residual_drho_lgamma = std::pow(drho_lg * dV, 1.0 / gamma);
    return r;
}

double fit_lower_bound_constant(const PressureLaw& law, double rho_bar_lo, double rho_bar_hi,
                                double sigma, double rho_max) {
    if (!(0.0 < rho_bar_lo && rho_bar_lo <= rho_bar_hi))
        throw std::invalid_argument("fit_lower_bound_constant: bad profile range");
    double cmin = std::numeric_limits<double>::infinity();
    const int nb = 64, no = 32, nr = 800;
    for (int b = 0; b <= nb; ++b) {
        const double rbar = rho_bar_lo + (rho_bar_hi - rho_bar_lo) * b / nb;
        for (int o = 0; o <= no; ++o) {
            // rho_app = rho_bar + offset, |offset| <= sigma/2
            const double rapp = rbar + sigma * (static_cast<double>(o) / no - 0.5);
            for (int q = 0; q <= nr; ++q) {
                const double rho = 1e-12 + (rho_max - 1e-12) * q / nr;
                const double drho = rho - rapp;
                const bool ess = std::abs(rho - rbar) < sigma;
                const double weight = ess ? drho * drho : 1.0;
                if (weight < 1e-12) continue;
                const double ratio = law.relative_energy(rho, rapp) / weight;
                cmin = std::min(cmin, ratio);
            }
        }
    }
    if (!(cmin > 0.0)) throw std::runtime_error("fit_lower_bound_constant: degenerate fit");
    return cmin * 0.998;
}

int64_t lower_bound_check(const Field3D& rho, const Field3D& rho_app,
                          const std::vector<double>& rho_bar_centers, const PressureLaw& law,
                          double sigma, double c) {
    if (!rho.same_grid(rho_app)) throw std::invalid_argument("lower_bound_check: grid mismatch");
    const int nh = rho.nh();
    int64_t violations = 0;
    for (int k = 0; k < rho.nlev(); ++k) {
        const double rbar = rho_bar_centers[k];
        const double* p = rho.level_data(k);
        const double* pa = rho_app.level_data(k);
        for (int m = 0; m < nh * nh; ++m) {
            const double drho = p[m] - pa[m];
            const bool ess = std::abs(p[m] - rbar) < sigma;
            const double weight = ess ? drho * drho : 1.0;
            if (ess && std::abs(drho) < 1e-8 * std::max({1.0, p[m], pa[m]})) continue;
            if (law.relative_energy(p[m], pa[m]) < c * weight) ++violations;
        }
    }
    return violations;
}

namespace {

/// viscous dissipation rate of the difference field (same stencils as the
/// solver's ledger)
double diff_dissipation_rate(const Flow3DState& a, const Flow3DState& b,
                             const ViscosityParams& visc, double dx, double dz) {
    const int nh = a.rho.nh(), n3 = a.rho.nlev();
    auto wrap = [&](int i) { return (i + nh) % nh; };
    double phi = 0.0;
    auto du1 = [&](int i, int j, int k) { return a.u1.at(i, j, k) - b.u1.at(i, j, k); };
    auto du2 = [&](int i, int j, int k) { return a.u2.at(i, j, k) - b.u2.at(i, j, k); };
    auto dw = [&](int i, int j, int jf) { return a.w.at(i, j, jf) - b.w.at(i, j, jf); };
    for (int k = 0; k < n3; ++k) {
        for (int j = 0; j < nh; ++j) {
            for (int i = 0; i < nh; ++i) {
                auto gh2 = [&](auto&& f) {
                    const double gx = (f(wrap(i + 1), j, k) - f(wrap(i - 1), j, k)) / (2.0 * dx);
                    const double gy = (f(i, wrap(j + 1), k) - f(i, wrap(j - 1), k)) / (2.0 * dx);
                    return gx * gx + gy * gy;
                };
                auto dzc = [&](auto&& f) {
                    const double fp = (k + 1 < n3) ? f(i, j, k + 1) : -f(i, j, k);
                    const double fm = (k - 1 >= 0) ? f(i, j, k - 1) : -f(i, j, k);
                    return (fp - fm) / (2.0 * dz);
                };
                const double dzw = (dw(i, j, k + 1) - dw(i, j, k)) / dz;
                const double wx = 0.5 *
                                  ((dw(wrap(i + 1), j, k) + dw(wrap(i + 1), j, k + 1)) -
                                   (dw(wrap(i - 1), j, k) + dw(wrap(i - 1), j, k + 1))) /
                                  (2.0 * dx);
                const double wy = 0.5 *
                                  ((dw(i, wrap(j + 1), k) + dw(i, wrap(j + 1), k + 1)) -
                                   (dw(i, wrap(j - 1), k) + dw(i, wrap(j - 1), k + 1))) /
                                  (2.0 * dx);
                const double d1x = (du1(wrap(i + 1), j, k) - du1(wrap(i - 1), j, k)) / (2.0 * dx);
                const double d2y = (du2(i, wrap(j + 1), k) - du2(i, wrap(j - 1), k)) / (2.0 * dx);
                const double div = d1x + d2y + dzw;
                phi += visc.mu * (gh2(du1) + gh2(du2) + wx * wx + wy * wy) +
                       visc.eps_visc * (dzc(du1) * dzc(du1) + dzc(du2) * dzc(du2) + dzw * dzw) +
                       visc.lambda * div * div;
            }
        }
    }
    return phi * dx * dx * dz;
}

Flow3DState flow_from_bundle(const AnsatzBundle& b, int nh, int n3, double lh) {
    Flow3DState f;
    std::vector<double> zc(n3), zf(n3 + 1);
    for (int k = 0; k < n3; ++k) zc[k] = (k + 0.5) / n3;
    for (int j = 0; j <= n3; ++j) zf[j] = static_cast<double>(j) / n3;
    f.rho = Field3D(nh, lh, zc);
    f.u1 = f.rho;
    f.u2 = f.rho;
    f.w = Field3D(nh, lh, zf);
    const int np = nh * nh;
    for (int k = 0; k < n3; ++k) {
        const int src = 2 * k + 1;
        std::copy(b.rho().level_data(src), b.rho().level_data(src) + np, f.rho.level_data(k));
        std::copy(b.u()[0].level_data(src), b.u()[0].level_data(src) + np, f.u1.level_data(k));
        std::copy(b.u()[1].level_data(src), b.u()[1].level_data(src) + np, f.u2.level_data(k));
    }
    for (int j = 0; j <= n3; ++j)
        std::copy(b.u()[2].level_data(2 * j), b.u()[2].level_data(2 * j) + np,
                  f.w.level_data(j));
    return f;
}

}  // namespace

ScalingStudyResult eps_scaling_study(const ScalingStudyConfig& cfg) {
    ScalingStudyResult out;
    const StaticState ss(cfg.law, cfg.rho_bottom);

    for (double eps : cfg.eps_list) {
        ScalingStudyResult::PerEps pe;
        pe.eps = eps;
        try {
            NS3DConfig nc;
            nc.law = cfg.law;
            nc.rho_bottom = cfg.rho_bottom;
            nc.nh = cfg.nh;
            nc.lh = cfg.lh;
            nc.n3 = cfg.n3;
            nc.eps = eps;
            nc.dt = cfg.dt;
            nc.visc = ViscosityParams{cfg.mu, eps, cfg.lambda};
            nc.cfl = cfg.cfl;

            NS3DSolver solver(nc);
            const auto zu = solver.union_levels();
            QGParams qp = ansatz_qg_params(ss, zu, cfg.nh, cfg.lh, cfg.mu, cfg.dt);
            QGSolver qg(qp);
            qg.set_random_band(cfg.seed, cfg.qg_modes, cfg.qg_amplitude);

            AnsatzBundle b0(ss, qg, eps, zu, /*strict_band=*/false);
            solver.init_from_ansatz(b0);
            Flow3DState app = flow_from_bundle(b0, cfg.nh, cfg.n3, cfg.lh);

            const double sigma = default_sigma(solver.rho_bar_centers());
            out.sigma = sigma;
            const double dx = cfg.lh / cfg.nh, dz = 1.0 / cfg.n3;

            pe.functional_t0 = entropy_report(solver.state(), app, cfg.law, eps,
                                              solver.rho_bar_centers(), sigma, dx, dz)
                                   .theorem_functional;

            const int64_t target = std::llround(cfg.t_end / cfg.dt);
            double diss = 0.0;
            double phi_prev = diff_dissipation_rate(solver.state(), app, nc.visc, dx, dz);
            while (solver.state().step < target) {
                for (int s = 0; s < cfg.sample_every && solver.state().step < target; ++s) {
                    solver.step();
                    qg.step();
                }
                AnsatzBundle bt(ss, qg, eps, zu, false);
                app = flow_from_bundle(bt, cfg.nh, cfg.n3, cfg.lh);
                const double phi = diff_dissipation_rate(solver.state(), app, nc.visc, dx, dz);
                diss += 0.5 * (phi_prev + phi) * cfg.dt * cfg.sample_every;
                phi_prev = phi;
                const auto rep = entropy_report(solver.state(), app, cfg.law, eps,
                                                solver.rho_bar_centers(), sigma, dx, dz, diss);
                pe.max_res_measure = std::max(pe.max_res_measure, rep.residual_measure);
                pe.max_res_mass_lgamma =
                    std::max(pe.max_res_mass_lgamma, rep.residual_mass_lgamma);
                pe.fitted_c_drho_lgamma =
                    std::max(pe.fitted_c_drho_lgamma,
                             rep.residual_drho_lgamma / std::pow(eps, 2.0 / cfg.law.gamma()));
            }
            pe.fitted_c_measure = pe.max_res_measure / (eps * eps);
            const auto rep = entropy_report(solver.state(), app, cfg.law, eps,
                                            solver.rho_bar_centers(), sigma, dx, dz, diss);
            pe.functional = rep.theorem_functional;
            pe.rel_entropy = rep.rel_entropy;
            pe.kinetic_error = rep.kinetic_error;
            pe.dissipation_error = rep.dissipation_error;
            pe.ok = true;
        } catch (const std::exception& e) {
            pe.ok = false;
            pe.error = e.what();
        }
        out.per_eps.push_back(pe);
    }

    out.all_ok = true;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& pe : out.per_eps) {
        if (!pe.ok) {
            out.all_ok = false;
            continue;
        }
        if (pe.functional <= 0.0) continue;
        const double x = std::log(pe.eps), y = std::log(pe.functional);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    out.slope = (n >= 2) ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return out;
}

}  // namespace slabflow
