#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sfv/grid.hpp"

namespace sfv {

/// N x N matrix with three periodic bands: row k couples columns k-1, k, k+1 (mod N).
/// For N = 2 the lower and upper bands hit the same column and add up.
struct CyclicTridiag {
    std::vector<double> lower;  ///< coefficient of x_{k-1} in row k
    std::vector<double> diag;
    std::vector<double> upper;  ///< coefficient of x_{k+1} in row k

    CyclicTridiag() = default;
    explicit CyclicTridiag(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

    static CyclicTridiag identity(std::size_t n);

    std::size_t size() const noexcept { return diag.size(); }
    void multiply(std::span<const double> x, std::span<double> out) const;
    std::vector<double> multiply(std::span<const double> x) const;
    Eigen::MatrixXd dense() const;
    double max_abs() const noexcept;
};

/// Solves m x = rhs. Thomas elimination with a Sherman-Morrison correction for the
/// two corner entries; dense partial-pivot elimination for N <= 8.
/// Throws SolverError when a pivot falls below 1e-14 (relative to the largest entry).
void solve_cyclic(const CyclicTridiag& m, std::span<const double> rhs, std::span<double> x);
std::vector<double> solve_cyclic(const CyclicTridiag& m, std::span<const double> rhs);
GridVector solve_cyclic(const CyclicTridiag& m, const GridVector& rhs);

/// Matrix of the stencil nu N^2 (1, -2, 1).
CyclicTridiag d2_matrix(std::size_t n, double scale = 1.0);

/// Eigenvalues of D^(2) on N cells: -2 N^2 (1 - cos(2 pi m / N)), m = 0..N-1.
std::vector<double> circulant_spectrum(const GridSpec& spec);

/// Real orthonormal (Euclidean) eigenbasis of D^(2): the constant vector, then
/// cos/sin pairs for 1 <= m < N/2, then the alternating vector when N is even.
struct FourierBasis {
    Eigen::MatrixXd vectors;      ///< columns are basis vectors
    std::vector<double> lambda;   ///< lambda_m >= 0 with D^(2) e = -lambda e
    std::vector<int> frequency;   ///< m for each column
};

FourierBasis fourier_basis(const GridSpec& spec);

}  // namespace sfv
