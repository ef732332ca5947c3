#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ns3d.hpp"

namespace slabflow {

/// Essential/residual partition of the domain by |rho - rho_bar| < sigma.
struct EssResDecomposition {
    std::vector<uint8_t> res_mask;  // 1 on the residual set, cell-ordered
    double measure_res{0.0};
    double measure_ess{0.0};
    double measure_total{0.0};
};

EssResDecomposition decompose_ess_res(const Field3D& rho_centers,
                                      const std::vector<double>& rho_bar_centers, double sigma);

/// sigma must satisfy 0 < sigma < min(inf rho_bar, 2/3).
double default_sigma(const std::vector<double>& rho_bar_centers);

struct EntropyReport {
    double rel_entropy{0.0};         // int E(rho, rho_app)
    double kinetic_error{0.0};       // int rho |du|^2
    double dissipation_error{0.0};   // running viscous dissipation of du
    double theorem_functional{0.0};  // kinetic_error + eps^-2 rel_entropy
    double residual_measure{0.0};    // |Omega_res| w.r.t. rho_bar
    double residual_mass_lgamma{0.0};     // ||[rho]_res||_Lgamma
    double residual_drho_l1{0.0};         // ||[drho]_res||_L1
    double residual_drho_lgamma{0.0};     // ||[drho]_res||_Lgamma
};

/// Quadratures: cell volumes dx^2 dz, vertical velocity averaged to centers.
EntropyReport entropy_report(const Flow3DState& st, const Flow3DState& app,
                             const PressureLaw& law, double eps,
                             const std::vector<double>& rho_bar_centers, double sigma,
                             double dx, double dz, double accumulated_dissipation = 0.0);

/// Lower-bound constant for E(rho, rho_app) >= c ([drho]^2_ess + 1_res),
/// fitted once over the admissible box (rho_app within sigma/2 of rho_bar,
/// rho in (0, rho_max]); slack keeps fresh samples from grazing the fit.
double fit_lower_bound_constant(const PressureLaw& law, double rho_bar_lo, double rho_bar_hi,
                                double sigma, double rho_max = 10.0);

/// Cell-wise verification; returns the number of violations.
int64_t lower_bound_check(const Field3D& rho, const Field3D& rho_app,
                          const std::vector<double>& rho_bar_centers, const PressureLaw& law,
                          double sigma, double c);

/// The eps-convergence study: for each eps, place data on the composite
/// approximate solution, run the slab solver to t_end while co-advancing the
/// QG stream function, and evaluate the error functional against the evolved
/// approximate solution. Also monitors the residual-set bounds along the run.
struct ScalingStudyConfig {
    PressureLaw law{2.0, 1.0};
    double rho_bottom{2.0};
    int nh{32};
    double lh{2.0 * 3.14159265358979323846};
    int n3{32};
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    double dt{1e-3};
    double t_end{0.5};
    double mu{1.0};
    double lambda{1.0};
    double qg_amplitude{0.25};
    int qg_modes{2};
    uint64_t seed{1234};
    int sample_every{25};
    double cfl{0.45};
};

struct ScalingStudyResult {
    struct PerEps {
        double eps{0.0};
        double functional_t0{0.0};
        double functional{0.0};     // at t_end
        double rel_entropy{0.0};
        double kinetic_error{0.0};
        double dissipation_error{0.0};
        double max_res_measure{0.0};        // sup_t |Omega_res(t)|
        double max_res_mass_lgamma{0.0};    // sup_t ||[rho]_res||_Lgamma^gamma... reported as norm
        double fitted_c_measure{0.0};       // sup_t |Omega_res| / eps^2
        double fitted_c_drho_lgamma{0.0};   // sup_t ||[drho]_res||_Lg / eps^{2/gamma}
        bool ok{false};
        std::string error;
    };
    std::vector<PerEps> per_eps;
    double slope{0.0};       // log-log fit of functional vs eps
    double sigma{0.0};
    bool all_ok{false};
};

ScalingStudyResult eps_scaling_study(const ScalingStudyConfig& cfg);

}  // namespace slabflow
