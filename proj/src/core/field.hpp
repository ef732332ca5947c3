#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace slabflow {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    Vec2 perp() const { return {-y, x}; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

/// Scalar samples on a uniform periodic n x n grid over a square of side l.
/// Storage is row-major with x1 fastest: index = j*n + i.
class Field2D {
  public:
    Field2D() = default;
    Field2D(int n, double l) : n_(n), l_(l), v_(static_cast<size_t>(n) * n, 0.0) {
        if (n <= 0 || l <= 0.0) throw std::invalid_argument("Field2D: bad grid");
    }

    int n() const { return n_; }
    double l() const { return l_; }
    double dx() const { return l_ / n_; }
    double x(int i) const { return i * dx(); }

    double& at(int i, int j) { return v_[static_cast<size_t>(j) * n_ + i]; }
    double at(int i, int j) const { return v_[static_cast<size_t>(j) * n_ + i]; }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    size_t size() const { return v_.size(); }

    bool same_grid(const Field2D& o) const { return n_ == o.n_ && l_ == o.l_; }

  private:
    int n_{0};
    double l_{0.0};
    std::vector<double> v_;
};

using VectorField2D = std::array<Field2D, 2>;

/// Scalar samples on (periodic square of side lh) x (a uniform set of vertical
/// levels). The level set is explicit so the same type serves periodic stacks,
/// wall-to-wall node grids and staggered cell-center grids.
/// Storage: x1 fastest, then x2, then level: index = (k*nh + j)*nh + i.
class Field3D {
  public:
    Field3D() = default;
    Field3D(int nh, double lh, std::vector<double> levels)
        : nh_(nh), lh_(lh), z_(std::move(levels)),
          v_(static_cast<size_t>(nh) * nh * z_.size(), 0.0) {
        if (nh <= 0 || lh <= 0.0 || z_.empty()) throw std::invalid_argument("Field3D: bad grid");
    }

    /// Periodic vertical stack z_k = k/n3, k = 0..n3-1 (period 1).
    static Field3D periodic(int nh, double lh, int n3) {
        std::vector<double> z(n3);
        for (int k = 0; k < n3; ++k) z[k] = static_cast<double>(k) / n3;
        return Field3D(nh, lh, std::move(z));
    }

    /// Wall-to-wall nodes z_k = k/n3, k = 0..n3 (both walls included).
    static Field3D nodes(int nh, double lh, int n3) {
        std::vector<double> z(n3 + 1);
        for (int k = 0; k <= n3; ++k) z[k] = static_cast<double>(k) / n3;
        return Field3D(nh, lh, std::move(z));
    }

    int nh() const { return nh_; }
    double lh() const { return lh_; }
    double dx() const { return lh_ / nh_; }
    int nlev() const { return static_cast<int>(z_.size()); }
    double z(int k) const { return z_[k]; }
    const std::vector<double>& levels() const { return z_; }

    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(k) * nh_ + j) * nh_ + i;
    }
    double& at(int i, int j, int k) { return v_[idx(i, j, k)]; }
    double at(int i, int j, int k) const { return v_[idx(i, j, k)]; }

    double* level_data(int k) { return v_.data() + static_cast<size_t>(k) * nh_ * nh_; }
    const double* level_data(int k) const {
        return v_.data() + static_cast<size_t>(k) * nh_ * nh_;
    }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    size_t size() const { return v_.size(); }

    bool same_grid(const Field3D& o) const {
        return nh_ == o.nh_ && lh_ == o.lh_ && z_ == o.z_;
    }

  private:
    int nh_{0};
    double lh_{0.0};
    std::vector<double> z_;
    std::vector<double> v_;
};

using VectorField3D = std::array<Field3D, 3>;

struct ViscosityParams {
    double mu{1.0};        // horizontal viscosity
    double eps_visc{0.1};  // vertical viscosity
    double lambda{1.0};    // bulk coefficient

    void validate() const {
        if (!(mu > 0.0) || !(eps_visc > 0.0) || !(lambda > 0.0))
            throw std::invalid_argument("ViscosityParams: coefficients must be positive");
    }
};

}  // namespace slabflow
