#include "sfv/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sfv/error.hpp"

namespace sfv {

namespace {

constexpr double kPivotTolerance = 1e-14;
constexpr std::size_t kDenseThreshold = 8;

void check_pivot(double pivot, double scale, std::size_t row) {
    if (!(std::abs(pivot) >= kPivotTolerance * scale)) {
        throw SolverError("near-singular pivot in cyclic solve at row " + std::to_string(row));
    }
}

void solve_dense(const CyclicTridiag& m, std::span<const double> rhs, std::span<double> x) {
    const std::size_t n = m.size();
    Eigen::MatrixXd a = m.dense();
    Eigen::VectorXd b(n);
    for (std::size_t k = 0; k < n; ++k) b(k) = rhs[k];
    const double scale = std::max(1e-300, m.max_abs());
    for (std::size_t col = 0; col < n; ++col) {
        Eigen::Index piv = 0;
        a.col(col).tail(n - col).cwiseAbs().maxCoeff(&piv);
        piv += static_cast<Eigen::Index>(col);
        check_pivot(a(piv, col), scale, col);
        if (piv != static_cast<Eigen::Index>(col)) {
            a.row(piv).swap(a.row(col));
            std::swap(b(piv), b(col));
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            a.row(r).tail(n - col) -= f * a.row(col).tail(n - col);
            b(r) -= f * b(col);
        }
    }
    for (std::size_t r = n; r-- > 0;) {
        double s = b(r);
        for (std::size_t c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
        x[r] = s / a(r, r);
    }
}

// Plain tridiagonal Thomas sweep: sub[k] x_{k-1} + d[k] x_k + sup[k] x_{k+1} = r[k].
void thomas(std::span<const double> sub, std::span<const double> d, std::span<const double> sup,
            std::span<const double> r, std::span<double> x, std::vector<double>& scratch,
            double scale) {
    const std::size_t n = d.size();
    scratch.resize(n);
    double beta = d[0];
    check_pivot(beta, scale, 0);
    x[0] = r[0] / beta;
    for (std::size_t k = 1; k < n; ++k) {
        scratch[k] = sup[k - 1] / beta;
        beta = d[k] - sub[k] * scratch[k];
        check_pivot(beta, scale, k);
        x[k] = (r[k] - sub[k] * x[k - 1]) / beta;
    }
    for (std::size_t k = n - 1; k-- > 0;) x[k] -= scratch[k + 1] * x[k + 1];
}

}  // namespace

CyclicTridiag CyclicTridiag::identity(std::size_t n) {
    CyclicTridiag m(n);
    std::fill(m.diag.begin(), m.diag.end(), 1.0);
    return m;
}

void CyclicTridiag::multiply(std::span<const double> x, std::span<double> out) const {
    const std::size_t n = size();
    if (x.size() != n || out.size() != n) throw DomainError("cyclic multiply: size mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lower[k] * x[(k + n - 1) % n] + diag[k] * x[k] + upper[k] * x[(k + 1) % n];
    }
}

std::vector<double> CyclicTridiag::multiply(std::span<const double> x) const {
    std::vector<double> out(size());
    multiply(x, out);
    return out;
}

Eigen::MatrixXd CyclicTridiag::dense() const {
    const std::size_t n = size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        a(k, (k + n - 1) % n) += lower[k];
        a(k, k) += diag[k];
        a(k, (k + 1) % n) += upper[k];
    }
    return a;
}

double CyclicTridiag::max_abs() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        m = std::max({m, std::abs(lower[k]), std::abs(diag[k]), std::abs(upper[k])});
    }
    return m;
}

void solve_cyclic(const CyclicTridiag& m, std::span<const double> rhs, std::span<double> x) {
    const std::size_t n = m.size();
    if (rhs.size() != n || x.size() != n || m.lower.size() != n || m.upper.size() != n) {
        throw DomainError("solve_cyclic: size mismatch");
    }
    if (n == 0) return;
    if (n <= kDenseThreshold) {
        solve_dense(m, rhs, x);
        return;
    }
    const double scale = std::max(1e-300, m.max_abs());
    // Corner entries: row 0 couples x_{n-1} (beta), row n-1 couples x_0 (alpha).
    const double beta = m.lower[0];
    const double alpha = m.upper[n - 1];
    const double gamma = -m.diag[0];
    check_pivot(gamma, scale, 0);

    std::vector<double> d(m.diag);
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;

    std::vector<double> scratch;
    thomas(m.lower, d, m.upper, rhs, x, scratch, scale);

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    std::vector<double> z(n);
    thomas(m.lower, d, m.upper, u, z, scratch, scale);

    const double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    check_pivot(denom, 1.0, n);
    const double fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    for (std::size_t k = 0; k < n; ++k) x[k] -= fact * z[k];
}

std::vector<double> solve_cyclic(const CyclicTridiag& m, std::span<const double> rhs) {
    std::vector<double> x(rhs.size());
    solve_cyclic(m, rhs, x);
    return x;
}

GridVector solve_cyclic(const CyclicTridiag& m, const GridVector& rhs) {
    auto x = solve_cyclic(m, rhs.values());
    return GridVector::centred(rhs.spec(), std::move(x));
}

CyclicTridiag d2_matrix(std::size_t n, double scale) {
    CyclicTridiag m(n);
    const double c = scale * static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        m.lower[k] = c;
        m.diag[k] = -2.0 * c;
        m.upper[k] = c;
    }
    return m;
}

std::vector<double> circulant_spectrum(const GridSpec& spec) {
    const std::size_t n = spec.n_cells();
    const double nn = static_cast<double>(n);
    std::vector<double> ev(n);
    for (std::size_t m = 0; m < n; ++m) {
        // 2 N^2 (1 - cos 2t) = 4 N^2 sin^2 t avoids cancellation for small t.
        const double s = std::sin(std::numbers::pi * static_cast<double>(m) / nn);
        ev[m] = -4.0 * nn * nn * s * s;
    }
    return ev;
}

FourierBasis fourier_basis(const GridSpec& spec) {
    const std::size_t n = spec.n_cells();
    const double nn = static_cast<double>(n);
    const auto spectrum = circulant_spectrum(spec);
    FourierBasis basis;
    basis.vectors = Eigen::MatrixXd::Zero(n, n);
    basis.lambda.reserve(n);
    basis.frequency.reserve(n);

    Eigen::Index col = 0;
    auto push = [&](int m) {
        basis.lambda.push_back(-spectrum[static_cast<std::size_t>(m)]);
        basis.frequency.push_back(m);
        ++col;
    };

    basis.vectors.col(col).setConstant(1.0 / std::sqrt(nn));
    push(0);
    const double amp = std::sqrt(2.0 / nn);
    for (std::size_t m = 1; 2 * m < n; ++m) {
        for (std::size_t j = 0; j < n; ++j) {
            const double arg = 2.0 * std::numbers::pi * static_cast<double>(m * j % n) / nn;
            basis.vectors(j, col) = amp * std::cos(arg);
            basis.vectors(j, col + 1) = amp * std::sin(arg);
        }
        push(static_cast<int>(m));
        push(static_cast<int>(m));
    }
    if (n % 2 == 0) {
        for (std::size_t j = 0; j < n; ++j) {
            basis.vectors(j, col) = (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(nn);
        }
        push(static_cast<int>(n / 2));
    }
    return basis;
}

}  // namespace sfv
