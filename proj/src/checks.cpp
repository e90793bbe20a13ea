#include "sfv/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "sfv/error.hpp"
#include "sfv/flux.hpp"
#include "sfv/linops.hpp"
#include "sfv/noise.hpp"
#include "sfv/stepper.hpp"

namespace sfv {

namespace {

constexpr double kSlack = 1e-10;
constexpr double kExact = 1e-12;

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : gen_(seed) {}

    std::size_t cells(std::size_t lo = 2, std::size_t hi = 48) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
    }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    GridVector vector(std::size_t n, double scale) {
        std::normal_distribution<double> nd(0.0, scale);
        std::vector<double> v(n);
        for (double& x : v) x = nd(gen_);
        return GridVector::centred(GridSpec(n), std::move(v));
    }

    /// Copy of v with roughly half of the entries perturbed; the others coincide.
    GridVector partial_copy(const GridVector& v, double scale) {
        std::vector<double> w(v.values().begin(), v.values().end());
        std::normal_distribution<double> nd(0.0, scale);
        std::bernoulli_distribution coin(0.5);
        for (double& x : w) {
            if (coin(gen_)) x += nd(gen_);
        }
        // restore zero mean on a perturbed entry only, so untouched entries stay equal
        double m = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) m += w[i] - v[i];
        w[0] -= m;
        return GridVector(v.spec(), std::move(w));
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

/// Fluxes exercised by the inequality suites: Burgers with random strength, a convex
/// cubic and a non-convex cubic (A' changes sign at +-1).
NumericalFlux sample_flux(Sampler& s, std::size_t i) {
    switch (i % 3) {
    case 0: return engquist_osher(burgers(s.uniform(0.0, 3.0)));
    case 1: return engquist_osher(polynomial_flux({0.0, 0.0, 0.0, 1.0 / 3.0}, std::vector<double>{0.0}, "v^3/3"));
    default:
        return engquist_osher(polynomial_flux({0.0, -1.0, 0.0, 1.0 / 3.0}, std::vector<double>{-1.0, 1.0},
                                              "v^3/3 - v"));
    }
}

std::vector<double> powm1(std::span<const double> v, int p) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::copysign(std::pow(std::abs(v[i]), p - 1), v[i]);
    return out;
}

CheckResult finish(std::string name, double worst, double bound, std::size_t count, std::string what) {
    CheckResult r;
    r.name = std::move(name);
    r.worst = worst;
    r.passed = worst <= bound;
    std::ostringstream os;
    os << count << " instances, worst " << what << " " << worst << " (bound " << bound << ")";
    r.detail = os.str();
    return r;
}

}  // namespace

CheckResult check_sbp(const CheckOptions& opt) {
    Sampler s(opt.seed + 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto n = s.cells();
        const auto v = s.vector(n, 1.0);
        const auto w = s.vector(n, 1.0);
        const auto dpv = d1_plus(v.values());
        const auto dmw = d1_minus(w.values());
        const auto dpw = d1_plus(w.values());
        const auto d2v = d2(v.values());
        const double a = dot(dpv, w.values());
        const double b = -dot(v.values(), dmw);
        const double sa = lp_norm(dpv, 2.0) * lp_norm(w, 2.0) + lp_norm(v, 2.0) * lp_norm(dmw, 2.0);
        worst = std::max(worst, std::abs(a - b) / sa);
        const double c = dot(dpv, dpw);
        const double d = -dot(d2v, w.values());
        const double sc = lp_norm(dpv, 2.0) * lp_norm(dpw, 2.0) + lp_norm(d2v, 2.0) * lp_norm(w, 2.0);
        worst = std::max(worst, std::abs(c - d) / sc);
    }
    return finish("sbp_identity", worst, kExact, opt.instances, "relative error");
}

CheckResult check_d2_spectrum(const CheckOptions&) {
    double worst = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 2; n <= 64; ++n) {
        const GridSpec spec(n);
        const auto basis = fourier_basis(spec);
        const double scale = 4.0 * static_cast<double>(n * n);
        for (Eigen::Index c = 0; c < basis.vectors.cols(); ++c) {
            std::vector<double> e(n);
            for (std::size_t j = 0; j < n; ++j) e[j] = basis.vectors(static_cast<Eigen::Index>(j), c);
            const auto de = d2(e);
            const double lam = basis.lambda[static_cast<std::size_t>(c)];
            double err = 0.0;
            for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(de[j] + lam * e[j]));
            worst = std::max(worst, err / scale);
            ++count;
        }
    }
    return finish("d2_spectrum", worst, kExact, count, "relative error");
}

CheckResult check_psi_isometry(const CheckOptions& opt) {
    Sampler s(opt.seed + 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto v = s.vector(s.cells(), s.log_uniform(1e-3, 1e3));
        const double a = reconstruct(v, 0).l2_norm();
        const double b = lp_norm(v, 2.0);
        worst = std::max(worst, std::abs(a - b) / b);
        const auto back = project(reconstruct(v, 0));
        for (std::size_t k = 0; k < v.size(); ++k) {
            worst = std::max(worst, std::abs(back[k] - v[k]) / lp_norm(v, INFINITY));
        }
    }
    return finish("psi_isometry", worst, kExact, opt.instances, "relative error");
}

CheckResult check_psi1_identity(const CheckOptions& opt) {
    Sampler s(opt.seed + 3);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto n = s.cells();
        const auto v = s.vector(n, 1.0);
        const auto r1 = reconstruct(v, 1);
        const double dp = lp_norm(d1_plus(v.values()), 2.0);
        const double h1 = r1.h1_seminorm();
        worst = std::max(worst, std::abs(h1 * h1 - dp * dp) / (dp * dp));
        const double dist = l2_distance(r1, reconstruct(v, 0));
        const double nn = static_cast<double>(n);
        const double expect = dp * dp / (3.0 * nn * nn);
        worst = std::max(worst, std::abs(dist * dist - expect) / expect);
    }
    return finish("psi1_identity", worst, kExact, opt.instances, "relative error");
}

CheckResult check_discrete_poincare(const CheckOptions& opt) {
    Sampler s(opt.seed + 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto v = s.vector(s.cells(), s.log_uniform(1e-2, 1e2));
        const double lhs = lp_norm(v, 2.0);
        const double rhs = lp_norm(d1_plus(v.values()), 2.0);
        worst = std::max(worst, (lhs - rhs) / std::max(1.0, rhs));
    }
    return finish("discrete_poincare", worst, kSlack, opt.instances, "violation");
}

CheckResult check_gradient_estimate(const CheckOptions& opt) {
    Sampler s(opt.seed + 5);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto v = s.vector(s.cells(), s.log_uniform(1e-2, 1e2));
        const double lhs = lp_norm(v, INFINITY);
        const double rhs = lp_norm(d1_plus(v.values()), 1.0);
        worst = std::max(worst, (lhs - rhs) / std::max(1.0, rhs));
    }
    return finish("gradient_estimate", worst, kSlack, opt.instances, "violation");
}

CheckResult check_lp_poincare(const CheckOptions& opt) {
    Sampler s(opt.seed + 6);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto v = s.vector(s.cells(), s.log_uniform(1e-1, 1e1));
        const auto dv = d1_plus(v.values());
        for (int p : {2, 4, 6, 8}) {
            const double lhs = dot(d1_plus(powm1(v.values(), p)), dv);
            const double np = lp_norm(v, p);
            const double rhs = 4.0 * (p - 1) / (p * p) * std::pow(np, p);
            worst = std::max(worst, (rhs - lhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    return finish("lp_poincare", worst, kSlack, opt.instances, "violation");
}

CheckResult check_stability(const CheckOptions& opt) {
    Sampler s(opt.seed + 7);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto nf = sample_flux(s, i);
        const auto v = s.vector(s.cells(), s.log_uniform(1e-1, 3.0));
        const auto div = flux_divergence(v.values(), nf);
        double mag = 0.0;
        for (double x : div) mag = std::max(mag, std::abs(x));
        for (int q : {2, 4, 6}) {
            const auto vq = powm1(v.values(), q);
            double scale = 0.0;
            for (std::size_t k = 0; k < vq.size(); ++k) scale += std::abs(vq[k]) * mag;
            const double val = dot(vq, div);
            worst = std::max(worst, -val / std::max(1.0, scale / static_cast<double>(vq.size())));
        }
    }
    return finish("stability_sign", worst, kSlack, opt.instances, "violation");
}

CheckResult check_dissipativity(const CheckOptions& opt) {
    Sampler s(opt.seed + 8);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto nf = sample_flux(s, i);
        const double nu = s.log_uniform(1e-2, 1.0);
        const auto v = s.vector(s.cells(), s.log_uniform(1e-1, 3.0));
        const auto b = drift(v, nf, nu);
        const double dp = lp_norm(d1_plus(v.values()), 2.0);
        const double lhs = dot(v.values(), b.values());
        const double rhs = -nu * dp * dp;
        const double scale = lp_norm(v, 2.0) * lp_norm(b, 2.0);
        worst = std::max(worst, (lhs - rhs) / std::max(1.0, scale));
    }
    return finish("drift_dissipativity", worst, kSlack, opt.instances, "violation");
}

CheckResult check_l1_contraction(const CheckOptions& opt) {
    Sampler s(opt.seed + 9);
    double worst = 0.0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto nf = sample_flux(s, i);
        const double nu = s.log_uniform(1e-2, 1.0);
        const auto n = s.cells(3, 48);
        const auto v = s.vector(n, s.log_uniform(1e-1, 3.0));
        const auto w = (i % 2 == 0) ? s.vector(n, 1.0) : s.partial_copy(v, 1.0);
        const auto bv = drift(v, nf, nu);
        const auto bw = drift(w, nf, nu);
        double val = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double db = bv[k] - bw[k];
            val += sign(v[k] - w[k], opt.sign) * db;
            scale += std::abs(db);
        }
        worst = std::max(worst, val / std::max(1.0, scale));
    }
    return finish("l1_drift_contraction", worst, kSlack, opt.instances, "violation");
}

CheckResult check_sign_convention(const CheckOptions& opt) {
    const double cases[] = {0.0, -0.0, 1.0, -1.0, 1e-300, -1e-300};
    const double expect[] = {1.0, 1.0, 1.0, -1.0, 1.0, -1.0};
    double worst = 0.0;
    for (std::size_t i = 0; i < 6; ++i) worst = std::max(worst, std::abs(sign(cases[i], opt.sign) - expect[i]));
    return finish("sign_convention", worst, 0.0, 6, "mismatch");
}

CheckResult check_fb0(const CheckOptions& opt) {
    Sampler s(opt.seed + 10);
    double worst = 0.0;
    int max_it = 0;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const auto nf = engquist_osher(burgers(i % 2 == 0 ? 0.0 : 1.0));
        StepperConfig cfg;
        cfg.nu = 0.1;
        cfg.dt = s.log_uniform(std::ldexp(1.0, -10), 0.5);
        const auto v = s.vector(s.cells(4, 48), s.log_uniform(1e-1, 3.0));
        const auto res = implicit_stage(v, nf, cfg, v);
        max_it = std::max(max_it, res.iterations);
        const double nw = lp_norm(res.w, 2.0);
        const double nv = lp_norm(v, 2.0);
        const double dw = lp_norm(d1_plus(res.w.values()), 2.0);
        worst = std::max(worst, nw * nw - (nv * nv - 2.0 * cfg.nu * cfg.dt * dw * dw));
    }
    auto r = finish("fb0_energy", worst, kSlack, opt.instances, "violation");
    r.detail += ", max Newton iterations " + std::to_string(max_it);
    return r;
}

CheckResult check_newton_uniqueness(const CheckOptions& opt) {
    Sampler s(opt.seed + 11);
    const auto nf = engquist_osher(burgers(1.0));
    StepperConfig cfg;
    cfg.nu = 0.1;
    cfg.dt = 0.5;
    double worst = 0.0;
    const std::size_t count = std::max<std::size_t>(1, opt.instances / 10);
    for (std::size_t i = 0; i < count; ++i) {
        const auto v = s.vector(s.cells(4, 48), s.log_uniform(1e-1, 3.0));
        const auto a = implicit_stage(v, nf, cfg, v);
        const auto b = implicit_stage(v, nf, cfg, GridVector::zeros(v.spec()));
        worst = std::max(worst, lp_norm(a.w - b.w, 2.0));
    }
    return finish("newton_uniqueness", worst, 10.0 * cfg.newton_tol, count, "l2 gap");
}

CheckResult check_coupled_contraction(const CheckOptions& opt) {
    Sampler s(opt.seed + 12);
    const double nu = 0.1;
    const auto nf = engquist_osher(burgers(std::pow(nu, 1.5)));
    const GridSpec spec(32);
    const auto dn = discretize(NoiseModel::single_sine(), spec);
    StepperConfig cfg;
    cfg.nu = nu;
    cfg.dt = std::ldexp(1.0, -10);
    const auto u0 = s.vector(32, 1.0);
    const auto v0 = s.vector(32, 1.0);
    const auto d = run_coupled_pair(u0, v0, opt.coupled_steps, nf, dn, cfg, RngStream(opt.seed, 0));
    double worst = 0.0;
    for (std::size_t k = 1; k < d.size(); ++k) worst = std::max(worst, d[k] - d[k - 1]);
    return finish("coupled_l1_contraction", worst, kSlack, opt.coupled_steps, "increase");
}

CheckResult check_kb_bound(const CheckOptions& opt) {
    const double nu = 0.1;
    const GridSpec spec(16);
    const auto dn = discretize(NoiseModel::single_sine(), spec);
    StepperConfig cfg;
    cfg.nu = nu;
    cfg.dt = std::ldexp(1.0, -6);
    const auto n_steps = static_cast<std::uint64_t>(std::llround(opt.kb_horizon / cfg.dt));
    const double dd = dn.d_bound();
    double worst = -INFINITY;
    std::ostringstream detail;
    for (double alpha : {0.0, std::pow(nu, 1.5)}) {
        const auto nf = engquist_osher(burgers(alpha));
        const std::size_t m = 8;
        std::vector<double> avg(m, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            double acc = 0.0;
            run_trajectory(GridVector::zeros(spec), n_steps, nf, dn, cfg, RngStream(opt.seed, r),
                           {Observer{1, [&](const TrajectoryState& st) {
                                if (st.n == 0) return;
                                const double g = lp_norm(d1_plus(st.u.values()), 2.0);
                                acc += g * g;
                            }}});
            avg[r] = acc / static_cast<double>(n_steps);
        }
        double mean = 0.0;
        for (double a : avg) mean += a;
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (double a : avg) ss += (a - mean) * (a - mean);
        const double se = std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m));
        const double bound = dd / (2.0 * nu) + cfg.dt * dd;
        worst = std::max(worst, mean - bound - 3.0 * se);
        detail << "alpha=" << alpha << ": mean " << mean << " vs bound " << bound << "; ";
    }
    CheckResult r;
    r.name = "kb_h1_bound";
    r.worst = worst;
    r.passed = worst <= 0.0;
    r.detail = detail.str();
    return r;
}

std::vector<CheckResult> run_selfchecks(const CheckOptions& opt) {
    using Fn = CheckResult (*)(const CheckOptions&);
    const std::pair<const char*, Fn> suites[] = {
        {"sbp_identity", check_sbp},
        {"d2_spectrum", check_d2_spectrum},
        {"psi_isometry", check_psi_isometry},
        {"psi1_identity", check_psi1_identity},
        {"discrete_poincare", check_discrete_poincare},
        {"gradient_estimate", check_gradient_estimate},
        {"lp_poincare", check_lp_poincare},
        {"stability_sign", check_stability},
        {"drift_dissipativity", check_dissipativity},
        {"l1_drift_contraction", check_l1_contraction},
        {"sign_convention", check_sign_convention},
        {"fb0_energy", check_fb0},
        {"newton_uniqueness", check_newton_uniqueness},
        {"coupled_l1_contraction", check_coupled_contraction},
        {"kb_h1_bound", check_kb_bound},
    };
    std::vector<CheckResult> out;
    for (const auto& [name, f] : suites) {
        try {
            out.push_back(f(opt));
        } catch (const Error& e) {
            out.push_back(CheckResult{name, false, INFINITY, std::string("error: ") + e.what()});
        }
    }
    return out;
}

}  // namespace sfv
