#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace sfv {

/// Uniform periodic mesh of the unit torus with cells (x_{i-1}, x_i], x_i = i/N.
class GridSpec {
public:
    explicit GridSpec(std::size_t n_cells);

    std::size_t n_cells() const noexcept { return n_; }
    double cell_width() const noexcept { return 1.0 / static_cast<double>(n_); }
    /// Interface x_i = i/N, for i in 0..N.
    double interface(std::size_t i) const noexcept {
        return static_cast<double>(i) / static_cast<double>(n_);
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    std::size_t n_;
};

/// Zero-mean vector on the discrete torus. Entry k (0-based) holds v_{k+1},
/// the value attached to cell (x_k, x_{k+1}].
class GridVector {
public:
    /// Takes ownership of `values`; throws DomainError unless the size matches,
    /// every entry is finite and the mean vanishes (|mean| <= 1e-12 max(1, |v|_inf)).
    GridVector(GridSpec spec, std::vector<double> values);

    static GridVector zeros(GridSpec spec);
    /// Subtracts the arithmetic mean before adopting the values.
    static GridVector centred(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const noexcept { return spec_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    GridVector& operator+=(const GridVector& other);
    GridVector& operator-=(const GridVector& other);
    GridVector& operator*=(double s);

    friend GridVector operator+(GridVector a, const GridVector& b) { return a += b; }
    friend GridVector operator-(GridVector a, const GridVector& b) { return a -= b; }
    friend GridVector operator*(double s, GridVector a) { return a *= s; }
    friend bool operator==(const GridVector&, const GridVector&) = default;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

inline constexpr double kMeanTolerance = 1e-12;
inline constexpr double kRecentreThreshold = 1e-14;

double mean(std::span<const double> v);
/// Subtracts the mean when it exceeds 1e-14 in magnitude.
void recentre(std::span<double> v);

// Periodic difference operators on arbitrary vectors of R^N (no ghost cells).
// `out` must not alias `v`.
void apply_d1_plus(std::span<const double> v, std::span<double> out);
void apply_d1_minus(std::span<const double> v, std::span<double> out);
void apply_d2(std::span<const double> v, std::span<double> out);

std::vector<double> d1_plus(std::span<const double> v);
std::vector<double> d1_minus(std::span<const double> v);
std::vector<double> d2(std::span<const double> v);

GridVector d1_plus(const GridVector& v);
GridVector d1_minus(const GridVector& v);
GridVector d2(const GridVector& v);

/// Normalised scalar product (1/N) sum v_i w_i.
double dot(std::span<const double> a, std::span<const double> b);
/// Normalised l^p norm; p = +infinity gives the max norm. Throws DomainError for p < 1.
double lp_norm(std::span<const double> v, double p);
double lp_norm(const GridVector& v, double p);

enum class SignConvention {
    standard,       ///< sign(z) = 1_{z>=0} - 1_{z<0}
    zero_negative,  ///< sign(0) = -1 (mutation used by the self-check)
    reversed,       ///< -sign(z) (mutation used by the self-check)
};

inline double sign(double z, SignConvention c = SignConvention::standard) noexcept {
    switch (c) {
    case SignConvention::zero_negative: return z > 0.0 ? 1.0 : -1.0;
    case SignConvention::reversed: return z >= 0.0 ? -1.0 : 1.0;
    case SignConvention::standard: break;
    }
    return z >= 0.0 ? 1.0 : -1.0;
}

enum class Phase { sin, cos };

/// amp * sin(2 pi m x) or amp * cos(2 pi m x), m >= 1 (zero mean on the torus).
struct Sinusoid {
    double amp = 1.0;
    int m = 1;
    Phase phase = Phase::sin;

    double operator()(double x) const noexcept;
    /// Exact integral over [a, b].
    double integral(double a, double b) const noexcept;
    /// Exact integral of the square over [a, b].
    double integral_sq(double a, double b) const noexcept;
};

/// Cell averages N * int_{x_{i-1}}^{x_i} f, exact for sinusoids.
GridVector project(const Sinusoid& f, const GridSpec& spec);
/// Cell averages by 5-point Gauss-Legendre on each cell, re-centred to zero mean.
/// Throws InvalidFunctionError if a cell integral is not finite.
GridVector project(const std::function<double(double)>& f, const GridSpec& spec);

/// Piecewise polynomial of degree <= 2 on the mesh, stored per cell in the local
/// coordinate s = N x - k in [0, 1] of cell k: c0 + c1 s + c2 s^2.
class Reconstruction {
public:
    Reconstruction(GridSpec spec, int order, std::vector<std::array<double, 3>> coeffs);

    const GridSpec& spec() const noexcept { return spec_; }
    int order() const noexcept { return order_; }

    /// Evaluates at any real x (wrapped to the torus, right-closed cells).
    double operator()(double x) const noexcept;
    /// Evaluates inside cell k at local coordinate s.
    double local(std::size_t k, double s) const noexcept;
    double cell_integral(std::size_t k) const noexcept;
    double l2_norm() const noexcept;
    /// L2 norm of the derivative (cellwise; jumps are ignored).
    double h1_seminorm() const noexcept;

private:
    GridSpec spec_;
    int order_;
    std::vector<std::array<double, 3>> coeffs_;
};

/// order 0: piecewise constant Psi_N; order 1: continuous piecewise linear through
/// (x_i, v_i); order 2: cellwise quadratic through the two interface values whose
/// cell average equals v_i. Throws DomainError for other orders.
Reconstruction reconstruct(const GridVector& v, int order);

/// Exact cell averages of a reconstruction.
GridVector project(const Reconstruction& f);

/// Exact L2 distance between reconstructions on nested meshes (one N divides the other).
double l2_distance(const Reconstruction& a, const Reconstruction& b);

/// CSV rows "i,x_i,v_i" (i = 1..N) with 17 significant digits.
void write_csv(std::ostream& os, const GridVector& v);

/// Little-endian snapshot: N as u64 followed by N f64.
void write_snapshot(std::ostream& os, const GridVector& v);
GridVector read_snapshot(std::istream& is);

// Little-endian primitives shared by the checkpoint formats.
void write_u64(std::ostream& os, std::uint64_t x);
void write_f64(std::ostream& os, double x);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);

}  // namespace sfv
