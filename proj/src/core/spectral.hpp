#pragma once

#include <complex>
#include <vector>

#include "field.hpp"

namespace slabflow {

using cplx = std::complex<double>;

/// FFT workspace for one periodic n x n grid. Holds the fftw plans; one
/// instance is single-threaded, independent instances may run concurrently.
class Spectral2D {
  public:
    Spectral2D(int n, double l);
    ~Spectral2D();
    Spectral2D(const Spectral2D&) = delete;
    Spectral2D& operator=(const Spectral2D&) = delete;
    Spectral2D(Spectral2D&& o) noexcept;
    Spectral2D& operator=(Spectral2D&&) = delete;

    int n() const { return n_; }
    double l() const { return l_; }
    int nkx() const { return n_ / 2 + 1; }
    size_t spec_size() const { return static_cast<size_t>(nkx()) * n_; }

    // Wavenumbers of the reduced r2c layout: index (i, j), i = 0..n/2.
    double kx(int i) const { return two_pi_over_l_ * i; }
    double ky(int j) const { return two_pi_over_l_ * (j <= n_ / 2 ? j : j - n_); }
    // odd derivatives zero the Nyquist mode (no consistent real representation)
    double kx_d(int i) const { return (i == n_ / 2) ? 0.0 : kx(i); }
    double ky_d(int j) const { return (j == n_ / 2) ? 0.0 : ky(j); }
    size_t sidx(int i, int j) const { return static_cast<size_t>(j) * nkx() + i; }

    void forward(const double* in, cplx* out) const;   // normalized (divides by n^2)
    void inverse(const cplx* in, double* out) const;

    void forward(const Field2D& f, std::vector<cplx>& out) const;
    void inverse(const std::vector<cplx>& in, Field2D& f) const;

    /// 2/3-rule truncation: zero every mode with |m1| > n/3 or |m2| > n/3.
    void dealias(cplx* c) const;
    int dealias_cut() const { return n_ / 3; }

    // In-place multiplier helpers on spectral arrays.
    void apply_ddx(cplx* c) const;
    void apply_ddy(cplx* c) const;
    void apply_laplacian(cplx* c) const;
    /// (-Delta)^{-1} with the mean mode pinned to zero.
    void apply_inv_neg_laplacian(cplx* c) const;

    // Field-level conveniences (forward + multiplier + inverse).
    Field2D ddx(const Field2D& f) const;
    Field2D ddy(const Field2D& f) const;
    Field2D laplacian(const Field2D& f) const;
    VectorField2D gradient(const Field2D& f) const;
    VectorField2D gradient_perp(const Field2D& f) const;
    double mean(const Field2D& f) const;

    std::vector<cplx> make_spec() const { return std::vector<cplx>(spec_size(), cplx{0.0, 0.0}); }

  private:
    int n_;
    double l_;
    double two_pi_over_l_;
    void* plan_fwd_;
    void* plan_bwd_;
    mutable std::vector<double> rbuf_;
    mutable std::vector<cplx> cbuf_;
};

/// FFT workspace for a fully periodic nh x nh x n3 stack (vertical period 1).
class Spectral3D {
  public:
    Spectral3D(int nh, double lh, int n3);
    ~Spectral3D();
    Spectral3D(const Spectral3D&) = delete;
    Spectral3D& operator=(const Spectral3D&) = delete;
    Spectral3D(Spectral3D&& o) noexcept;
    Spectral3D& operator=(Spectral3D&&) = delete;

    int nh() const { return nh_; }
    int n3() const { return n3_; }
    double lh() const { return lh_; }
    int nkx() const { return nh_ / 2 + 1; }
    size_t spec_size() const { return static_cast<size_t>(nkx()) * nh_ * n3_; }

    double kx(int i) const { return two_pi_over_l_ * i; }
    double ky(int j) const { return two_pi_over_l_ * (j <= nh_ / 2 ? j : j - nh_); }
    double kz(int k) const { return two_pi_ * (k <= n3_ / 2 ? k : k - n3_); }
    double kx_d(int i) const { return (i == nh_ / 2) ? 0.0 : kx(i); }
    double ky_d(int j) const { return (j == nh_ / 2) ? 0.0 : ky(j); }
    double kz_d(int k) const { return (k == n3_ / 2) ? 0.0 : kz(k); }
    size_t sidx(int i, int j, int k) const {
        return (static_cast<size_t>(k) * nh_ + j) * nkx() + i;
    }

    void forward(const Field3D& f, std::vector<cplx>& out) const;
    void inverse(const std::vector<cplx>& in, Field3D& f) const;

    Field3D ddx(const Field3D& f) const;
    Field3D ddy(const Field3D& f) const;
    Field3D ddz(const Field3D& f) const;

    std::vector<cplx> make_spec() const { return std::vector<cplx>(spec_size(), cplx{0.0, 0.0}); }

  private:
    int nh_, n3_;
    double lh_;
    double two_pi_over_l_, two_pi_;
    void* plan_fwd_;
    void* plan_bwd_;
    mutable std::vector<double> rbuf_;
    mutable std::vector<cplx> cbuf_;
};

}  // namespace slabflow
