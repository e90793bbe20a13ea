#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfv/grid.hpp"
#include "sfv/linops.hpp"

namespace sfv {

/// Physical flux A with its derivative. A'' is never needed by the scheme.
struct FluxModel {
    std::function<double(double)> a;
    std::function<double(double)> a_prime;
    int growth_exponent = 1;  ///< p_A in |A'(v)| <= C_A (1 + |v|^p_A)
    std::string label;
    /// Points where A' changes sign; when present the Engquist-Osher integrals are
    /// split there and evaluated exactly from A.
    std::optional<std::vector<double>> a_prime_roots;
    /// Set for the Burgers family, which has a closed-form Engquist-Osher flux.
    std::optional<double> burgers_alpha;

    /// Smallest C_A such that |A'(v)| <= C_A (1 + |v|^p_A) on `samples` points of [lo, hi].
    double growth_constant(double lo = -10.0, double hi = 10.0, int samples = 2001) const;
};

/// A(v) = alpha v^2 / 2. Throws DomainError for alpha < 0.
FluxModel burgers(double alpha);

/// A(v) = sum_k coeffs[k] v^k; coeffs[0] must vanish for Engquist-Osher.
/// `a_prime_roots` may be omitted, in which case the flux falls back to quadrature.
FluxModel polynomial_flux(std::vector<double> coeffs,
                          std::optional<std::vector<double>> a_prime_roots = std::nullopt,
                          std::string label = "polynomial");

/// Two-point monotone flux Abar(v, w) with its partial derivatives.
class NumericalFlux {
public:
    const FluxModel& source() const noexcept { return source_; }

    double operator()(double v, double w) const;
    double d1(double v, double w) const;  ///< d/dv Abar = [A'(v)]_+
    double d2(double v, double w) const;  ///< d/dw Abar = -[A'(w)]_-

    bool is_linear_zero() const noexcept {
        return source_.burgers_alpha.has_value() && *source_.burgers_alpha == 0.0;
    }

private:
    friend NumericalFlux engquist_osher(const FluxModel& model);
    explicit NumericalFlux(FluxModel model);

    double positive_part_integral(double v) const;  // int_0^v [A']_+
    double negative_part_integral(double w) const;  // int_0^w [A']_-

    FluxModel source_;
    std::vector<double> roots_;  // sorted
};

/// Abar(v, w) = int_0^v [A']_+ - int_0^w [A']_-.
/// Throws NormalizationError unless A(0) = 0.
NumericalFlux engquist_osher(const FluxModel& model);

/// Adaptive Simpson quadrature on [a, b] with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 50);

/// b(v) = -D^(1,-) Abar^N(v) + nu D^(2) v, with Abar^N(v)_i = Abar(v_i, v_{i+1}).
void apply_drift(std::span<const double> v, const NumericalFlux& nf, double nu, std::span<double> out);
GridVector drift(const GridVector& v, const NumericalFlux& nf, double nu);

/// Exact Jacobian of the drift at v.
void fill_drift_jacobian(std::span<const double> v, const NumericalFlux& nf, double nu,
                         CyclicTridiag& jac);
CyclicTridiag drift_jacobian(const GridVector& v, const NumericalFlux& nf, double nu);

/// D^(1,-) Abar^N(v), the flux-difference part of the drift, on any vector of R^N.
std::vector<double> flux_divergence(std::span<const double> v, const NumericalFlux& nf);

}  // namespace sfv
