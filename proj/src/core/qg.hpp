#pragma once

#include <cstdint>
#include <vector>

#include "field.hpp"
#include "spectral.hpp"

namespace slabflow {

struct QGParams {
    double beta{1.0};   // <rho_bar / P'(rho_bar)>
    double m{1.0};      // <rho_bar>
    double mu{1.0};     // horizontal viscosity
    double damp{1.0};   // Ekman pumping coefficient
    double lh{0.0};     // box side
    int nh{0};          // grid size (power of two)
    double dt{1e-3};
    double cfl{0.5};

    void validate() const {
        if (!(beta > 0.0 && m > 0.0 && mu > 0.0 && damp >= 0.0))
            throw std::invalid_argument("QGParams: coefficients must be positive");
        if (!(lh > 0.0) || nh < 4 || (nh & (nh - 1)) != 0 || !(dt > 0.0))
            throw std::invalid_argument("QGParams: bad grid or step");
    }
};

struct QGEnergy {
    std::vector<double> norms_sq;       // ||grad^j Q||^2, j = 0..n
    std::vector<double> running_diss;   // int_0^t (||grad^{j+1}Q||^2 + ||grad^{j+2}Q||^2), j < n
    double hierarchy_sum{0.0};          // sum_j (||grad^j Q||^2 + ||grad^{j+1} Q||^2)
    double monitored{0.0};              // hierarchy_sum + sum_j running_diss[j]
};

/// Pseudo-spectral solver for the damped quasi-geostrophic equation
///   d/dt[(beta - m Lap) Q] = m grad_perp Q . grad Lap Q - mu Lap^2 Q + damp Lap Q
/// on the periodic square, with 2/3-rule dealiasing, Crank-Nicolson on the
/// linear dissipative part and second-order Adams-Bashforth on the Jacobian.
class QGSolver {
  public:
    explicit QGSolver(const QGParams& p);
    QGSolver(QGSolver&&) noexcept = default;

    const QGParams& params() const { return p_; }
    double time() const { return t_; }
    int64_t step_count() const { return nstep_; }

    void set_state(const Field2D& q0);
    void set_single_mode(int m1, int m2, double amplitude);
    /// Random band-limited stream function: modes with 0 < |m| <= mode_max,
    /// amplitudes ~ amplitude / |m|^2, fixed seed.
    void set_random_band(uint64_t seed, int mode_max, double amplitude);

    void step();
    void advance(double t_end);

    Field2D q() const;
    double max_velocity() const;  // max |grad_perp Q|

    QGEnergy energy(int order) const;  // order n <= 4

    /// dQ/dt from the evolution law (spectral in, spectral out).
    std::vector<cplx> rhs(const std::vector<cplx>& qh) const;
    /// Directional derivative of rhs at qh in direction vh (gives d2Q/dt2
    /// when vh = rhs(qh)).
    std::vector<cplx> rhs_tangent(const std::vector<cplx>& qh,
                                  const std::vector<cplx>& vh) const;

    const std::vector<cplx>& state_spec() const { return qh_; }
    void set_state_spec(const std::vector<cplx>& qh);
    const Spectral2D& spectral() const { return sp_; }

    /// u = grad_perp Q and the pressure pi solving
    /// -Lap pi = m div(u . grad u), zero mean.
    void recover_velocity_pressure(VectorField2D& u, Field2D& pi) const;
    /// Max-norm residual of the recovered 2D momentum balance.
    double momentum_residual() const;

  private:
    std::vector<cplx> jacobian(const std::vector<cplx>& qh) const;
    double diss_pair(int j) const;  // ||grad^{j+1}Q||^2 + ||grad^{j+2}Q||^2
    double grad_norm_sq(int j) const;

    QGParams p_;
    Spectral2D sp_;
    std::vector<cplx> qh_;
    std::vector<cplx> nprev_;
    bool have_prev_{false};
    double t_{0.0};
    int64_t nstep_{0};
    std::array<double, 4> diss_int_{0.0, 0.0, 0.0, 0.0};
};

}  // namespace slabflow
