#include "sfv/analytic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sfv/error.hpp"
#include "sfv/linops.hpp"

namespace sfv {

namespace {

// Split-step resolvent factor: x = nu dt lambda, stationary variance per unit
// noise energy is dt (1+x)^2 / ((1+x)^2 - 1) = (1+x)^2 / (nu lambda (2+x)).
double split_variance(double nu, double lambda, double dt) {
    const double x = nu * dt * lambda;
    return (1.0 + x) * (1.0 + x) / (nu * lambda * (2.0 + x));
}

}  // namespace

double lambda_n(std::size_t n, int m0) {
    if (m0 < 1) throw DomainError("mode frequency must be >= 1");
    if (n <= 2 * static_cast<std::size_t>(m0)) {
        throw ResolutionError("grid with N = " + std::to_string(n) + " does not resolve mode " +
                              std::to_string(m0) + " (need N > 2 m0)");
    }
    const double nn = static_cast<double>(n);
    const double s = std::sin(std::numbers::pi * m0 / nn);
    return 4.0 * nn * nn * s * s;
}

AnalyticCase::AnalyticCase(double nu, int m0, std::size_t n_cells, std::optional<double> dt, double amp)
    : nu_(nu), m0_(m0), n_(n_cells), dt_(dt), amp_(amp) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive");
    if (dt && (!(*dt > 0.0) || !std::isfinite(*dt))) throw DomainError("dt must be positive");
    if (!std::isfinite(amp) || amp == 0.0) throw DomainError("noise amplitude must be finite and nonzero");
    lambda_n_ = sfv::lambda_n(n_cells, m0);
    const double w = 2.0 * std::numbers::pi * m0;
    lambda_ = w * w;
    const double z = std::numbers::pi * m0 / static_cast<double>(n_cells);
    const double sinc = std::sin(z) / z;
    g_norm_sq_ = 0.5 * amp * amp * sinc * sinc;

    const GridSpec spec(n_cells);
    const Sinusoid g{amp, m0, Phase::sin};
    const auto gv = project(g, spec);
    double ip = 0.0;
    for (std::size_t k = 0; k < n_cells; ++k) ip += gv[k] * g.integral(spec.interface(k), spec.interface(k + 1));
    epsilon_ = ip >= 0.0 ? 1 : -1;
}

double AnalyticCase::kappa_n() const noexcept { return g_norm_sq_ / (2.0 * nu_ * lambda_n_); }

double AnalyticCase::kappa_n_dt() const {
    if (!dt_) throw DomainError("kappa_n_dt needs dt");
    return split_variance(nu_, lambda_n_, *dt_) * g_norm_sq_;
}

double stationary_phi(const AnalyticCase& c, Discretisation d) {
    const double kappa = d == Discretisation::semi ? c.kappa_n() : c.kappa_n_dt();
    return 1.0 / std::sqrt(1.0 + 2.0 * kappa);
}

double w2_space(const AnalyticCase& c) {
    const GridSpec spec(c.n_cells());
    const Sinusoid g{c.amp(), c.m0(), Phase::sin};
    const auto gv = project(g, spec);
    // continuum mode scaled by 1/sqrt(2 nu lambda), discrete one by eps/sqrt(2 nu lambda_N)
    const Sinusoid f{c.amp() / std::sqrt(2.0 * c.nu() * c.lambda()), c.m0(), Phase::sin};
    const double s = c.epsilon_n() / std::sqrt(2.0 * c.nu() * c.lambda_n());
    const double h = spec.cell_width();
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.n_cells(); ++k) {
        const double a = spec.interface(k);
        const double b = spec.interface(k + 1);
        const double ck = s * gv[k];
        acc += f.integral_sq(a, b) - 2.0 * ck * f.integral(a, b) + ck * ck * h;
    }
    return std::sqrt(std::max(acc, 0.0));
}

double w2_time(const AnalyticCase& c) {
    if (!c.dt()) throw DomainError("w2_time needs dt");
    const double nl = c.nu() * c.lambda_n();
    const double x = *c.dt() * nl;
    const double a = 1.0 / (2.0 * nl);
    const double b = split_variance(c.nu(), c.lambda_n(), *c.dt());
    // |sqrt(a) - sqrt(b)| with a - b in closed form
    const double diff = (3.0 * x + 2.0 * x * x) / (2.0 * nl * (2.0 + x));
    return diff / (std::sqrt(a) + std::sqrt(b)) * std::sqrt(c.g_norm_sq());
}

namespace {

Eigen::MatrixXd lyapunov_impl(const DiscreteNoise& dn, double nu, std::optional<double> dt) {
    if (!(nu > 0.0)) throw DomainError("nu must be positive");
    if (dt && !(*dt > 0.0)) throw DomainError("dt must be positive");
    const auto basis = fourier_basis(dn.spec());
    const Eigen::MatrixXd& v = basis.vectors;
    const Eigen::MatrixXd qhat = v.transpose() * dn.q_matrix() * v;
    const auto n = qhat.rows();
    const double scale = qhat.cwiseAbs().maxCoeff();
    for (Eigen::Index b = 0; b < n; ++b) {
        if (std::abs(qhat(0, b)) > 1e-12 * std::max(1.0, scale)) {
            throw IllPosedError("noise has energy along the constant vector; no stationary covariance");
        }
    }
    Eigen::MatrixXd khat = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 1; a < n; ++a) {
        for (Eigen::Index b = 1; b < n; ++b) {
            const double la = basis.lambda[static_cast<std::size_t>(a)];
            const double lb = basis.lambda[static_cast<std::size_t>(b)];
            if (dt) {
                const double ra = 1.0 / (1.0 + nu * *dt * la);
                const double rb = 1.0 / (1.0 + nu * *dt * lb);
                khat(a, b) = *dt * qhat(a, b) / (1.0 - ra * rb);
            } else {
                khat(a, b) = qhat(a, b) / (nu * (la + lb));
            }
        }
    }
    Eigen::MatrixXd k = v * khat * v.transpose();
    return 0.5 * (k + k.transpose());
}

}  // namespace

Eigen::MatrixXd lyapunov_covariance(const DiscreteNoise& dn, double nu) {
    return lyapunov_impl(dn, nu, std::nullopt);
}

Eigen::MatrixXd lyapunov_covariance(const DiscreteNoise& dn, double nu, double dt) {
    return lyapunov_impl(dn, nu, dt);
}

double gaussian_w2(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2) {
    if (k1.rows() != k1.cols() || k1.rows() != k2.rows() || k2.rows() != k2.cols() || k1.rows() == 0) {
        throw DomainError("gaussian_w2: covariance shapes differ");
    }
    const double s1 = k1.cwiseAbs().maxCoeff();
    const double s2 = k2.cwiseAbs().maxCoeff();
    const double comm = (k1 * k2 - k2 * k1).cwiseAbs().maxCoeff();
    if (comm > 1e-10 * std::max(1.0, s1 * s2) * static_cast<double>(k1.rows())) {
        throw IllPosedError("gaussian_w2 needs commuting covariances");
    }
    // generic combination so that a common eigenbasis is recovered
    const double c = s2 > 0.0 ? 0.7548776662466927 * std::max(s1, 1e-300) / s2 : 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k1 + c * k2);
    const Eigen::MatrixXd& u = es.eigenvectors();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        const auto e = u.col(j);
        const double m1 = std::max(0.0, e.dot(k1 * e));
        const double m2 = std::max(0.0, e.dot(k2 * e));
        const double d = std::sqrt(m1) - std::sqrt(m2);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(k1.rows()));
}

}  // namespace sfv
