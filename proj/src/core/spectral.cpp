#include "spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <numbers>

namespace slabflow {

namespace {
// fftw plan creation/destruction is not thread-safe.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Spectral2D::Spectral2D(int n, double l)
    : n_(n), l_(l), two_pi_over_l_(2.0 * std::numbers::pi / l),
      rbuf_(static_cast<size_t>(n) * n), cbuf_(static_cast<size_t>(n) * (n / 2 + 1)) {
    if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("Spectral2D: n must be a power of two >= 4");
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_2d(n_, n_, rbuf_.data(),
                                     reinterpret_cast<fftw_complex*>(cbuf_.data()), FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(n_, n_, reinterpret_cast<fftw_complex*>(cbuf_.data()),
                                     rbuf_.data(), FFTW_ESTIMATE);
}

Spectral2D::~Spectral2D() {
    if (!plan_fwd_ && !plan_bwd_) return;
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

Spectral2D::Spectral2D(Spectral2D&& o) noexcept
    : n_(o.n_), l_(o.l_), two_pi_over_l_(o.two_pi_over_l_), plan_fwd_(o.plan_fwd_),
      plan_bwd_(o.plan_bwd_), rbuf_(std::move(o.rbuf_)), cbuf_(std::move(o.cbuf_)) {
    o.plan_fwd_ = nullptr;
    o.plan_bwd_ = nullptr;
}

void Spectral2D::forward(const double* in, cplx* out) const {
    std::memcpy(rbuf_.data(), in, rbuf_.size() * sizeof(double));
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_.data(),
                         reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / (static_cast<double>(n_) * n_);
    for (size_t m = 0; m < spec_size(); ++m) out[m] *= s;
}

void Spectral2D::inverse(const cplx* in, double* out) const {
    std::memcpy(cbuf_.data(), in, cbuf_.size() * sizeof(cplx));
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                         reinterpret_cast<fftw_complex*>(cbuf_.data()), out);
}

void Spectral2D::forward(const Field2D& f, std::vector<cplx>& out) const {
    out.resize(spec_size());
    forward(f.data().data(), out.data());
}

void Spectral2D::inverse(const std::vector<cplx>& in, Field2D& f) const {
    if (f.n() != n_) f = Field2D(n_, l_);
    inverse(in.data(), f.data().data());
}

void Spectral2D::dealias(cplx* c) const {
    const int cut = dealias_cut();
    for (int j = 0; j < n_; ++j) {
        const int mj = (j <= n_ / 2) ? j : j - n_;
        for (int i = 0; i < nkx(); ++i) {
            if (i > cut || std::abs(mj) > cut) c[sidx(i, j)] = 0.0;
        }
    }
}

void Spectral2D::apply_ddx(cplx* c) const {
    for (int j = 0; j < n_; ++j)
        for (int i = 0; i < nkx(); ++i) c[sidx(i, j)] *= cplx(0.0, kx_d(i));
}

void Spectral2D::apply_ddy(cplx* c) const {
    for (int j = 0; j < n_; ++j) {
        const cplx iky(0.0, ky_d(j));
        for (int i = 0; i < nkx(); ++i) c[sidx(i, j)] *= iky;
    }
}

void Spectral2D::apply_laplacian(cplx* c) const {
    for (int j = 0; j < n_; ++j) {
        const double ky2 = ky(j) * ky(j);
        for (int i = 0; i < nkx(); ++i) c[sidx(i, j)] *= -(kx(i) * kx(i) + ky2);
    }
}

void Spectral2D::apply_inv_neg_laplacian(cplx* c) const {
    for (int j = 0; j < n_; ++j) {
        const double ky2 = ky(j) * ky(j);
        for (int i = 0; i < nkx(); ++i) {
            const double k2 = kx(i) * kx(i) + ky2;
            c[sidx(i, j)] = (k2 > 0.0) ? c[sidx(i, j)] / k2 : cplx{0.0, 0.0};
        }
    }
}

Field2D Spectral2D::ddx(const Field2D& f) const {
    std::vector<cplx> c;
    forward(f, c);
    apply_ddx(c.data());
    Field2D out(n_, l_);
    inverse(c, out);
    return out;
}

Field2D Spectral2D::ddy(const Field2D& f) const {
    std::vector<cplx> c;
    forward(f, c);
    apply_ddy(c.data());
    Field2D out(n_, l_);
    inverse(c, out);
    return out;
}

Field2D Spectral2D::laplacian(const Field2D& f) const {
    std::vector<cplx> c;
    forward(f, c);
    apply_laplacian(c.data());
    Field2D out(n_, l_);
    inverse(c, out);
    return out;
}

VectorField2D Spectral2D::gradient(const Field2D& f) const {
    return {ddx(f), ddy(f)};
}

VectorField2D Spectral2D::gradient_perp(const Field2D& f) const {
    Field2D gx = ddx(f), gy = ddy(f);
    for (auto& v : gy.data()) v = -v;
    return {gy, gx};  // (-d/dy, d/dx)
}

double Spectral2D::mean(const Field2D& f) const {
    double s = 0.0;
    for (double v : f.data()) s += v;
    return s / f.size();
}

Spectral3D::Spectral3D(int nh, double lh, int n3)
    : nh_(nh), n3_(n3), lh_(lh), two_pi_over_l_(2.0 * std::numbers::pi / lh),
      two_pi_(2.0 * std::numbers::pi),
      rbuf_(static_cast<size_t>(nh) * nh * n3),
      cbuf_(static_cast<size_t>(nh) * (nh / 2 + 1) * n3) {
    if (nh < 4 || (nh & (nh - 1)) != 0 || n3 < 4 || (n3 & (n3 - 1)) != 0)
        throw std::invalid_argument("Spectral3D: dims must be powers of two >= 4");
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_3d(n3_, nh_, nh_, rbuf_.data(),
                                     reinterpret_cast<fftw_complex*>(cbuf_.data()), FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_3d(n3_, nh_, nh_, reinterpret_cast<fftw_complex*>(cbuf_.data()),
                                     rbuf_.data(), FFTW_ESTIMATE);
}

Spectral3D::~Spectral3D() {
    if (!plan_fwd_ && !plan_bwd_) return;
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

Spectral3D::Spectral3D(Spectral3D&& o) noexcept
    : nh_(o.nh_), n3_(o.n3_), lh_(o.lh_), two_pi_over_l_(o.two_pi_over_l_), two_pi_(o.two_pi_),
      plan_fwd_(o.plan_fwd_), plan_bwd_(o.plan_bwd_), rbuf_(std::move(o.rbuf_)),
      cbuf_(std::move(o.cbuf_)) {
    o.plan_fwd_ = nullptr;
    o.plan_bwd_ = nullptr;
}

void Spectral3D::forward(const Field3D& f, std::vector<cplx>& out) const {
    if (f.nh() != nh_ || f.nlev() != n3_) throw std::invalid_argument("Spectral3D: grid mismatch");
    out.resize(spec_size());
    std::memcpy(rbuf_.data(), f.data().data(), rbuf_.size() * sizeof(double));
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), rbuf_.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    const double s = 1.0 / (static_cast<double>(nh_) * nh_ * n3_);
    for (auto& v : out) v *= s;
}

void Spectral3D::inverse(const std::vector<cplx>& in, Field3D& f) const {
    std::memcpy(cbuf_.data(), in.data(), cbuf_.size() * sizeof(cplx));
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                         reinterpret_cast<fftw_complex*>(cbuf_.data()), f.data().data());
}

Field3D Spectral3D::ddx(const Field3D& f) const {
    std::vector<cplx> c;
    forward(f, c);
    for (int k = 0; k < n3_; ++k)
        for (int j = 0; j < nh_; ++j)
            for (int i = 0; i < nkx(); ++i) c[sidx(i, j, k)] *= cplx(0.0, kx_d(i));
    Field3D out = f;
    inverse(c, out);
    return out;
}

Field3D Spectral3D::ddy(const Field3D& f) const {
    std::vector<cplx> c;
    forward(f, c);
    for (int k = 0; k < n3_; ++k)
        for (int j = 0; j < nh_; ++j) {
            const cplx iky(0.0, ky_d(j));
            for (int i = 0; i < nkx(); ++i) c[sidx(i, j, k)] *= iky;
        }
    Field3D out = f;
    inverse(c, out);
    return out;
}

Field3D Spectral3D::ddz(const Field3D& f) const {
    std::vector<cplx> c;
    forward(f, c);
    for (int k = 0; k < n3_; ++k) {
        const cplx ikz(0.0, kz_d(k));
        for (int j = 0; j < nh_; ++j)
            for (int i = 0; i < nkx(); ++i) c[sidx(i, j, k)] *= ikz;
    }
    Field3D out = f;
    inverse(c, out);
    return out;
}

}  // namespace slabflow
