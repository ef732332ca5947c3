#pragma once

#include <cstdint>
#include <vector>

#include "ansatz.hpp"
#include "field.hpp"
#include "pressure.hpp"
#include "static_state.hpp"

namespace slabflow {

/// Prognostic state of the slab solver. rho, u1, u2 live at cell centers
/// (levels (k+1/2)/n3), the vertical velocity w at the z-faces (levels j/n3,
/// wall faces pinned to zero). Horizontal directions are periodic.
struct Flow3DState {
    Field3D rho, u1, u2, w;
    double t{0.0};
    int64_t step{0};
};

struct EnergyLedger {
    double t{0.0};
    double kinetic{0.0};
    double potential_entropy{0.0};  // eps^-2 int E(rho, rho_bar)
    double dissipation{0.0};        // running viscous dissipation integral
    double total{0.0};
};

struct NS3DToggles {
    bool coriolis{true};
    bool pressure{true};
    bool viscosity{true};
    bool advection{true};
    bool mass_transport{true};
};

struct NS3DConfig {
    PressureLaw law{2.0, 1.0};
    double rho_bottom{2.0};
    int nh{32};
    double lh{2.0 * 3.14159265358979323846};
    int n3{32};
    double eps{0.1};
    double dt{1e-3};
    ViscosityParams visc{1.0, 0.1, 1.0};
    double cfl{0.45};
    NS3DToggles toggles;
};

/// Finite-difference solver for the scaled rotating compressible system on
/// the slab. The stiff linearized acoustic-gravity coupling is integrated by
/// a Crank-Nicolson solve per horizontal Fourier mode (tridiagonal in the
/// vertical), the Coriolis term by an exact rotation, everything else
/// explicitly. The pressure-gravity term is discretized in the well-balanced
/// split grad(P(rho)-P(rho_bar)) - (rho-rho_bar) grad G, which makes the
/// hydrostatic state an exact discrete equilibrium.
class NS3DSolver {
  public:
    explicit NS3DSolver(const NS3DConfig& cfg);

    const NS3DConfig& config() const { return cfg_; }
    const Flow3DState& state() const { return st_; }
    Flow3DState& state() { return st_; }

    void set_rest_state();
    /// Sample the composite approximate solution on the staggered grid.
    /// The bundle must be built on this solver's union level set, see
    /// union_levels().
    void init_from_ansatz(const AnsatzBundle& b);

    std::vector<double> union_levels() const;  // faces and centers interleaved
    const std::vector<double>& center_levels() const { return zc_; }
    const std::vector<double>& face_levels() const { return zf_; }
    const std::vector<double>& rho_bar_centers() const { return rbc_; }

    void step();
    void advance(double t_end);

    EnergyLedger ledger() const;
    /// advance and collect the ledger every sample_every steps (plus the
    /// initial and final instants)
    std::vector<EnergyLedger> run_to(double t_end, int sample_every);

    double total_mass() const;
    double max_velocity() const;

  private:
    void explicit_stage(double dt);
    void coriolis_stage(double dt);
    void acoustic_stage(double dt);
    double dissipation_rate() const;

    NS3DConfig cfg_;
    int nh_, n3_;
    double dx_, dz_;
    std::vector<double> zc_, zf_;
    std::vector<double> rbc_, rbf_;    // rho_bar at centers and faces
    std::vector<double> pbc_;          // P(rho_bar) at centers
    std::vector<double> dpc_;          // P'(rho_bar) at centers
    Flow3DState st_;
    double diss_integral_{0.0};

    // per-mode tridiagonal factors for the CN acoustic solve
    struct Tridiag {
        std::vector<double> s2;                 // |s|^2 per horizontal mode
        std::vector<cplx> low, diag, up;        // factored in-place per mode
        bool built{false};
        double dt{0.0};
    } tri_;
    void build_tridiag(double dt);

    void* fft_ = nullptr;  // Spectral2D for the horizontal transforms
    struct Scratch;
    std::unique_ptr<Scratch> scr_;

  public:
    ~NS3DSolver();
    NS3DSolver(NS3DSolver&&) noexcept;
};

/// Well-prepared data: the ansatz bundle evaluated on the solver grid.
/// Returns a ready solver positioned at t = 0.
NS3DSolver make_well_prepared_solver(const NS3DConfig& cfg, const QGSolver& qg);

}  // namespace slabflow
