#include "pressure.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace slabflow {

double PressureLaw::P(double rho) const {
    if (rho < 0.0) throw std::domain_error("P: rho must be >= 0");
    return a_ * std::pow(rho, gamma_);
}

double PressureLaw::dP(double rho) const {
    if (rho < 0.0) throw std::domain_error("dP: rho must be >= 0");
    return a_ * gamma_ * std::pow(rho, gamma_ - 1.0);
}

double PressureLaw::d2P(double rho) const {
    if (rho <= 0.0) throw std::domain_error("d2P: rho must be > 0");
    return a_ * gamma_ * (gamma_ - 1.0) * std::pow(rho, gamma_ - 2.0);
}

double PressureLaw::d3P(double rho) const {
    if (rho <= 0.0) throw std::domain_error("d3P: rho must be > 0");
    return a_ * gamma_ * (gamma_ - 1.0) * (gamma_ - 2.0) * std::pow(rho, gamma_ - 3.0);
}

double PressureLaw::d4P(double rho) const {
    if (rho <= 0.0) throw std::domain_error("d4P: rho must be > 0");
    return a_ * gamma_ * (gamma_ - 1.0) * (gamma_ - 2.0) * (gamma_ - 3.0) *
           std::pow(rho, gamma_ - 4.0);
}

double PressureLaw::H(double rho) const {
    if (rho < 0.0) throw std::domain_error("H: rho must be >= 0");
    if (rho == 0.0) return 0.0;
    if (gamma_ == 1.0) return a_ * rho * std::log(rho);
    return a_ * rho * (std::pow(rho, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
}

double PressureLaw::dH(double rho) const {
    if (rho <= 0.0) throw std::domain_error("dH: rho must be > 0");
    if (gamma_ == 1.0) return a_ * (std::log(rho) + 1.0);
    return a_ * (gamma_ * std::pow(rho, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
}

double PressureLaw::d2H(double rho) const {
    if (rho <= 0.0) throw std::domain_error("d2H: rho must be > 0");
    return a_ * gamma_ * std::pow(rho, gamma_ - 2.0);
}

double PressureLaw::relative_energy(double rho, double r) const {
    if (rho < 0.0) throw std::domain_error("relative_energy: rho must be >= 0");
    if (r <= 0.0) throw std::domain_error("relative_energy: r must be > 0");
    return H(rho) - H(r) - dH(r) * (rho - r);
}

namespace {
double sandwich_weight(double drho, double gamma, double M) {
    const double d = std::abs(drho);
    return (d < M) ? d * d : std::pow(d, gamma);
}
}  // namespace

EntropyBounds::Sandwich EntropyBounds::check(const PressureLaw& law, double rho, double r) const {
    const double w = sandwich_weight(rho - r, law.gamma(), M);
    const double e = law.relative_energy(rho, r);
    Sandwich s{c1 * w, e, c2 * w, false};
    // below double-precision resolution of E the comparison is meaningless
    if (std::abs(rho - r) < 1e-8 * std::max({1.0, rho, r})) return s;
    s.violated = (e < s.lower) || (e > s.upper);
    return s;
}

EntropyBounds fit_entropy_bounds(const PressureLaw& law, double r_lo, double r_hi, double M,
                                 int n_samples, uint64_t seed, double rho_max) {
    if (!(0.0 < r_lo && r_lo <= r_hi)) throw std::invalid_argument("fit_entropy_bounds: empty bracket");
    if (!(M > 0.0) || n_samples <= 0) throw std::invalid_argument("fit_entropy_bounds: bad parameters");

    auto ratio = [&](double rho, double r) {
        // keep clear of the diagonal, where E is pure cancellation noise
        if (std::abs(rho - r) < 1e-6) return std::numeric_limits<double>::quiet_NaN();
        const double w = sandwich_weight(rho - r, law.gamma(), M);
        return law.relative_energy(rho, r) / w;
    };

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double lo_rho = 0.0, lo_r = r_lo, hi_rho = 0.0, hi_r = r_lo;
    auto consider = [&](double rho, double r) {
        if (!(rho >= 0.0) || rho > rho_max || r < r_lo || r > r_hi) return;
        const double q = ratio(rho, r);
        if (!std::isfinite(q)) return;
        if (q < lo) { lo = q; lo_rho = rho; lo_r = r; }
        if (q > hi) { hi = q; hi_rho = rho; hi_r = r; }
    };

    // Deterministic scan of the (rho, r) box, with the |rho-r| = M seam and
    // the rho -> 0, rho -> r edges represented explicitly.
    const int nr = 160, nrho = 1200;
    for (int a = 0; a <= nr; ++a) {
        const double r = r_lo + (r_hi - r_lo) * a / nr;
        for (int b = 0; b <= nrho; ++b) consider(1e-12 + (rho_max - 1e-12) * b / nrho, r);
        for (double side : {-1.0, 1.0}) {
            consider(r + side * M * (1.0 - 1e-9), r);
            consider(r + side * M * (1.0 + 1e-9), r);
            consider(r + side * 2e-6, r);
        }
    }
    // Local refinement around both extremes.
    for (int pass = 0; pass < 4; ++pass) {
        const double span_rho = rho_max * std::pow(0.02, pass + 1);
        const double span_r = (r_hi - r_lo) * std::pow(0.02, pass + 1);
        const double c_lo[2] = {lo_rho, lo_r}, c_hi[2] = {hi_rho, hi_r};
        for (const double* c : {c_lo, c_hi}) {
            for (int a = -20; a <= 20; ++a)
                for (int b = -20; b <= 20; ++b)
                    consider(c[0] + span_rho * b / 20.0, c[1] + span_r * a / 20.0);
        }
    }
    // Random samples from the same box as additional candidates.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rho_dist(0.0, rho_max);
    std::uniform_real_distribution<double> r_dist(r_lo, r_hi);
    for (int s = 0; s < n_samples; ++s) consider(rho_dist(rng), r_dist(rng));

    // 0.2% slack: the refined extremes sit well within it, so fresh samples
    // from the same box cannot violate the sandwich.
    EntropyBounds b;
    b.c1 = lo * 0.998;
    b.c2 = hi * 1.002;
    b.M = M;
    b.r_lo = r_lo;
    b.r_hi = r_hi;
    b.rho_max = rho_max;
    if (!(b.c1 > 0.0) || !(b.c2 >= b.c1))
        throw std::runtime_error("fit_entropy_bounds: degenerate fit");
    return b;
}

}  // namespace slabflow
