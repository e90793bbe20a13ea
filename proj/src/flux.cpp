#include "sfv/flux.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfv/error.hpp"

namespace sfv {

namespace {

constexpr double kNormalizationTolerance = 1e-14;

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double FluxModel::growth_constant(double lo, double hi, int samples) const {
    double c = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double v = lo + (hi - lo) * s / std::max(1, samples - 1);
        const double bound = 1.0 + std::pow(std::abs(v), growth_exponent);
        c = std::max(c, std::abs(a_prime(v)) / bound);
    }
    return c;
}

FluxModel burgers(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw DomainError("burgers flux needs alpha >= 0, got " + std::to_string(alpha));
    }
    FluxModel model;
    model.a = [alpha](double v) { return 0.5 * alpha * v * v; };
    model.a_prime = [alpha](double v) { return alpha * v; };
    model.growth_exponent = 1;
    model.label = "burgers(alpha=" + std::to_string(alpha) + ")";
    model.a_prime_roots = std::vector<double>{0.0};
    model.burgers_alpha = alpha;
    return model;
}

FluxModel polynomial_flux(std::vector<double> coeffs, std::optional<std::vector<double>> a_prime_roots,
                          std::string label) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    FluxModel model;
    model.a = [coeffs](double v) {
        double s = 0.0;
        for (auto c = coeffs.rbegin(); c != coeffs.rend(); ++c) s = s * v + *c;
        return s;
    };
    model.a_prime = [coeffs](double v) {
        double s = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;) s = s * v + static_cast<double>(k) * coeffs[k];
        return s;
    };
    model.growth_exponent = std::max<int>(1, static_cast<int>(coeffs.size()) - 2);
    model.label = std::move(label);
    model.a_prime_roots = std::move(a_prime_roots);
    return model;
}

NumericalFlux::NumericalFlux(FluxModel model) : source_(std::move(model)) {
    if (source_.a_prime_roots) {
        roots_ = *source_.a_prime_roots;
        std::sort(roots_.begin(), roots_.end());
    }
}

NumericalFlux engquist_osher(const FluxModel& model) {
    if (!model.a || !model.a_prime) throw NormalizationError("flux model lacks A or A'");
    const double a0 = model.a(0.0);
    if (std::abs(a0) > kNormalizationTolerance) {
        throw NormalizationError("Engquist-Osher flux requires A(0) = 0, got " + std::to_string(a0));
    }
    return NumericalFlux(model);
}

double NumericalFlux::positive_part_integral(double v) const {
    if (v == 0.0) return 0.0;
    const double lo = std::min(0.0, v);
    const double hi = std::max(0.0, v);
    double s = 0.0;
    if (source_.a_prime_roots) {
        double left = lo;
        auto piece = [&](double p, double q) {
            if (q <= p) return;
            if (source_.a_prime(0.5 * (p + q)) > 0.0) s += source_.a(q) - source_.a(p);
        };
        for (double r : roots_) {
            if (r <= lo || r >= hi) continue;
            piece(left, r);
            left = r;
        }
        piece(left, hi);
    } else {
        const auto& ap = source_.a_prime;
        s = adaptive_simpson([&ap](double x) { return std::max(ap(x), 0.0); }, lo, hi);
    }
    return v > 0.0 ? s : -s;
}

double NumericalFlux::negative_part_integral(double w) const {
    if (w == 0.0) return 0.0;
    const double lo = std::min(0.0, w);
    const double hi = std::max(0.0, w);
    double s = 0.0;
    if (source_.a_prime_roots) {
        double left = lo;
        auto piece = [&](double p, double q) {
            if (q <= p) return;
            if (source_.a_prime(0.5 * (p + q)) < 0.0) s += source_.a(p) - source_.a(q);
        };
        for (double r : roots_) {
            if (r <= lo || r >= hi) continue;
            piece(left, r);
            left = r;
        }
        piece(left, hi);
    } else {
        const auto& ap = source_.a_prime;
        s = adaptive_simpson([&ap](double x) { return std::max(-ap(x), 0.0); }, lo, hi);
    }
    return w > 0.0 ? s : -s;
}

double NumericalFlux::operator()(double v, double w) const {
    if (source_.burgers_alpha) {
        const double vp = std::max(v, 0.0);
        const double wm = std::min(w, 0.0);
        return 0.5 * *source_.burgers_alpha * (vp * vp + wm * wm);
    }
    return positive_part_integral(v) - negative_part_integral(w);
}

double NumericalFlux::d1(double v, double /*w*/) const {
    if (source_.burgers_alpha) return *source_.burgers_alpha * std::max(v, 0.0);
    return std::max(source_.a_prime(v), 0.0);
}

double NumericalFlux::d2(double /*v*/, double w) const {
    if (source_.burgers_alpha) return *source_.burgers_alpha * std::min(w, 0.0);
    return std::min(source_.a_prime(w), 0.0);
}

std::vector<double> flux_divergence(std::span<const double> v, const NumericalFlux& nf) {
    const std::size_t n = v.size();
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = nf(v[k], v[(k + 1) % n]);
    return d1_minus(f);
}

void apply_drift(std::span<const double> v, const NumericalFlux& nf, double nu, std::span<double> out) {
    const std::size_t n = v.size();
    if (out.size() != n) throw DomainError("drift: size mismatch");
    const double nn = static_cast<double>(n);
    const double visc = nu * nn * nn;
    if (nf.is_linear_zero()) {
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = visc * (v[(k + 1) % n] - 2.0 * v[k] + v[(k + n - 1) % n]);
        }
        return;
    }
    // Flux through the left interface of cell k is Abar(v_{k-1}, v_k).
    double left_flux = nf(v[n - 1], v[0]);
    for (std::size_t k = 0; k < n; ++k) {
        const double right_flux = nf(v[k], v[(k + 1) % n]);
        out[k] = -nn * (right_flux - left_flux) +
                 visc * (v[(k + 1) % n] - 2.0 * v[k] + v[(k + n - 1) % n]);
        left_flux = right_flux;
    }
}

GridVector drift(const GridVector& v, const NumericalFlux& nf, double nu) {
    std::vector<double> out(v.size());
    apply_drift(v.values(), nf, nu, out);
    return GridVector::centred(v.spec(), std::move(out));
}

void fill_drift_jacobian(std::span<const double> v, const NumericalFlux& nf, double nu,
                         CyclicTridiag& jac) {
    const std::size_t n = v.size();
    if (jac.size() != n) jac = CyclicTridiag(n);
    const double nn = static_cast<double>(n);
    const double visc = nu * nn * nn;
    for (std::size_t k = 0; k < n; ++k) {
        const double vl = v[(k + n - 1) % n];
        const double vc = v[k];
        const double vr = v[(k + 1) % n];
        jac.lower[k] = nn * nf.d1(vl, vc) + visc;
        jac.diag[k] = nn * (nf.d2(vl, vc) - nf.d1(vc, vr)) - 2.0 * visc;
        jac.upper[k] = -nn * nf.d2(vc, vr) + visc;
    }
}

CyclicTridiag drift_jacobian(const GridVector& v, const NumericalFlux& nf, double nu) {
    CyclicTridiag jac(v.size());
    fill_drift_jacobian(v.values(), nf, nu, jac);
    return jac;
}

}  // namespace sfv
