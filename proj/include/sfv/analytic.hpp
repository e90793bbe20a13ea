#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "sfv/grid.hpp"
#include "sfv/noise.hpp"

namespace sfv {

/// lambda_N = 2 N^2 (1 - cos(2 pi m0 / N)). Throws ResolutionError unless N > 2 m0.
double lambda_n(std::size_t n, int m0);

/// Linear case A = 0 driven by the single mode g = amp sin(2 pi m0 x).
class AnalyticCase {
public:
    /// Throws DomainError for nu <= 0, m0 < 1 or dt <= 0, ResolutionError for N <= 2 m0.
    AnalyticCase(double nu, int m0, std::size_t n_cells, std::optional<double> dt = std::nullopt,
                 double amp = 1.4142135623730951);

    double nu() const noexcept { return nu_; }
    int m0() const noexcept { return m0_; }
    std::size_t n_cells() const noexcept { return n_; }
    std::optional<double> dt() const noexcept { return dt_; }
    double amp() const noexcept { return amp_; }

    /// (2 pi m0)^2
    double lambda() const noexcept { return lambda_; }
    double lambda_n() const noexcept { return lambda_n_; }
    /// ||Pi_N g||^2 in the normalised l2 norm.
    double g_norm_sq() const noexcept { return g_norm_sq_; }
    /// ||g||^2 / (2 nu lambda_N)
    double kappa_n() const noexcept;
    /// dt (1 + x)^2 / ((1 + x)^2 - 1) ||g||^2 with x = nu dt lambda_N. Needs dt.
    double kappa_n_dt() const;
    /// sign <g, Psi_N Pi_N g>
    int epsilon_n() const noexcept { return epsilon_; }

    AnalyticCase with_dt(double dt) const { return AnalyticCase(nu_, m0_, n_, dt, amp_); }
    AnalyticCase with_cells(std::size_t n) const { return AnalyticCase(nu_, m0_, n, dt_, amp_); }

private:
    double nu_;
    int m0_;
    std::size_t n_;
    std::optional<double> dt_;
    double amp_;
    double lambda_;
    double lambda_n_;
    double g_norm_sq_;
    int epsilon_;
};

enum class Discretisation { semi, split };

/// E[exp(-||V||^2)] = 1 / sqrt(1 + 2 kappa) under the stationary Gaussian law.
double stationary_phi(const AnalyticCase& c, Discretisation d);

/// W2 between the continuum and the semi-discrete invariant measures, by exact
/// per-cell integration of the squared difference.
double w2_space(const AnalyticCase& c);

/// W2 between the split-step and the semi-discrete invariant measures. Needs dt.
double w2_time(const AnalyticCase& c);

/// Stationary covariance of dU = nu D^(2) U dt + dW^{Q,N} (entries in the Euclidean basis).
/// Throws IllPosedError if the noise has a component along the constant vector.
Eigen::MatrixXd lyapunov_covariance(const DiscreteNoise& dn, double nu);
/// Stationary covariance of the split-step chain with step dt.
Eigen::MatrixXd lyapunov_covariance(const DiscreteNoise& dn, double nu, double dt);

/// W2 between centred Gaussians with commuting covariances K1, K2 (Euclidean entries on
/// N cells), measured in the normalised l2 norm. Throws IllPosedError if they do not commute.
double gaussian_w2(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2);

}  // namespace sfv
