#pragma once

#include <cstdint>
#include <stdexcept>

namespace slabflow {

/// Barotropic pressure law P(rho) = a rho^gamma with its internal energy
/// H(rho) = rho * int_1^rho P(z)/z^2 dz and the relative energy
/// E(rho, r) = H(rho) - H(r) - H'(r)(rho - r).
///
/// The closed form of H is a rho (rho^{g-1} - 1)/(g - 1) for gamma > 1 and
/// a rho ln(rho) for gamma = 1. rho H''(rho) = P'(rho) holds identically.
class PressureLaw {
  public:
    PressureLaw(double gamma, double a) : gamma_(gamma), a_(a) {
        if (!(gamma >= 1.0)) throw std::invalid_argument("PressureLaw: gamma must be >= 1");
        if (!(a > 0.0)) throw std::invalid_argument("PressureLaw: a must be > 0");
    }

    double gamma() const { return gamma_; }
    double a() const { return a_; }

    double P(double rho) const;
    double dP(double rho) const;   // P'
    double d2P(double rho) const;  // P''
    double d3P(double rho) const;  // P'''
    double d4P(double rho) const;  // P''''

    double H(double rho) const;    // defined for rho >= 0 (continuous extension at 0)
    double dH(double rho) const;   // H', rho > 0
    double d2H(double rho) const;  // H'', rho > 0

    double relative_energy(double rho, double r) const;

  private:
    double gamma_;
    double a_;
};

/// Two-sided coercivity constants for the relative energy: with
/// W(rho, r) = |rho-r|^2 1_{|rho-r|<M} + |rho-r|^gamma 1_{|rho-r|>=M},
/// c1 W <= E(rho, r) <= c2 W for rho in (0, rho_max], r in [r_lo, r_hi].
/// The constants are fitted by sampling; the fit is rejected if any sample
/// of the fitting set violates the sandwich after the safety slack.
struct EntropyBounds {
    double c1{0.0};
    double c2{0.0};
    double M{1.0};
    double r_lo{0.0};
    double r_hi{0.0};
    double rho_max{0.0};

    struct Sandwich {
        double lower;
        double value;
        double upper;
        bool violated;
    };

    Sandwich check(const PressureLaw& law, double rho, double r) const;
};

EntropyBounds fit_entropy_bounds(const PressureLaw& law, double r_lo, double r_hi, double M,
                                 int n_samples, uint64_t seed, double rho_max = 10.0);

}  // namespace slabflow
