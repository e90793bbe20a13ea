// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sfv/analytic.hpp"
#include "sfv/cli.hpp"
#include "sfv/config.hpp"
#include "sfv/estimator.hpp"
#include "sfv/stepper.hpp"

using namespace sfv;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNu = 0.1;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

GridVector random_vector(std::mt19937_64& gen, std::size_t n, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = nd(gen);
    return GridVector::centred(GridSpec(n), std::move(v));
}

double norm(std::span<const double> v) { return lp_norm(v, 2.0); }

// Samples of the flux family used by the inequality suites.
NumericalFlux random_flux(std::mt19937_64& gen, int i) {
    switch (i % 3) {
    case 0: return engquist_osher(burgers(std::uniform_real_distribution<double>(0.0, 3.0)(gen)));
    case 1: return engquist_osher(polynomial_flux({0.0, 0.0, 0.0, 1.0 / 3.0}, std::vector<double>{0.0}, "cubic"));
    default:
        return engquist_osher(polynomial_flux({0.0, -1.0, 0.0, 1.0 / 3.0}, std::vector<double>{-1.0, 1.0}, "cubic-shift"));
    }
}

// ---------------------------------------------------------------------------
// 1. exact identities

Verdict exact_identities() {
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<std::size_t> pick_n(2, 64);
    std::uniform_real_distribution<double> log_scale(-2.0, 1.0);
    double w_sbp = 0.0, w_iso = 0.0, w_psi1 = 0.0, w_psi1d = 0.0, w_spec = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = pick_n(gen);
        const double nn = static_cast<double>(n);
        const double sc = std::pow(10.0, log_scale(gen));
        const auto v = random_vector(gen, n, sc);
        const auto w = random_vector(gen, n, sc);

        // <D+ v, w> = -<v, D- w>
        const auto dpv = d1_plus(v.values());
        const auto dmw = d1_minus(w.values());
        const double lhs = dot(dpv, w.values()), rhs = -dot(v.values(), dmw);
        w_sbp = std::max(w_sbp, std::abs(lhs - rhs) / (norm(dpv) * norm(w.values()) + norm(v.values()) * norm(dmw)));

        // ||Psi_N v||_{L2} = ||v||, by midpoint evaluation of the reconstruction
        const auto r0 = reconstruct(v, 0);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += std::pow(r0((k + 0.5) / nn), 2);
        const double l2v = norm(v.values());
        w_iso = std::max(w_iso, std::abs(std::sqrt(s / nn) - l2v) / l2v);

        // ||(Psi1 v)'||^2 = ||D+ v||^2 from the cell slopes, and
        // ||Psi1 v - Psi_N v||^2 = ||D+ v||^2 / (3 N^2) by 3-point Gauss per cell
        const auto r1 = reconstruct(v, 1);
        const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
        const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        double slope_sq = 0.0, diff_sq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            slope_sq += std::pow(nn * (r1.local(k, 1.0) - r1.local(k, 0.0)), 2);
            for (int q = 0; q < 3; ++q) diff_sq += gw[q] * std::pow(r1.local(k, gx[q]) - r0.local(k, gx[q]), 2);
        }
        slope_sq /= nn;
        diff_sq /= nn;
        const double dp2 = std::pow(norm(dpv), 2);
        w_psi1 = std::max(w_psi1, std::abs(slope_sq - dp2) / dp2);
        w_psi1d = std::max(w_psi1d, std::abs(diff_sq - dp2 / (3 * nn * nn)) / (dp2 / (3 * nn * nn)));

        // D2 acting on a Fourier vector against -4 N^2 sin^2(pi m / N), scaled by the stencil norm 4 N^2
        const int m = std::uniform_int_distribution<int>(0, static_cast<int>(n) - 1)(gen);
        const double ph = std::uniform_real_distribution<double>(0.0, 2 * kPi)(gen);
        std::vector<double> e(n);
        for (std::size_t k = 0; k < n; ++k) e[k] = std::cos(2 * kPi * m * static_cast<double>(k) / nn + ph);
        const double mu = -4.0 * nn * nn * std::pow(std::sin(kPi * m / nn), 2);
        const auto de = d2(e);
        double err = 0.0, emax = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            err = std::max(err, std::abs(de[k] - mu * e[k]));
            emax = std::max(emax, std::abs(e[k]));
        }
        w_spec = std::max(w_spec, err / (4 * nn * nn * emax));
        const auto spec = circulant_spectrum(GridSpec(n));
        w_spec = std::max(w_spec, std::abs(spec[static_cast<std::size_t>(m)] - mu) / (4 * nn * nn));
    }
    const double worst = std::max({w_sbp, w_iso, w_psi1, w_psi1d, w_spec});
    std::ostringstream d;
    d << "max rel err sbp " << fmt("%.1e", w_sbp) << ", isometry " << fmt("%.1e", w_iso) << ", Psi1 slope "
      << fmt("%.1e", w_psi1) << ", Psi1 gap " << fmt("%.1e", w_psi1d) << ", D2 spectrum " << fmt("%.1e", w_spec)
      << " (tol 1e-12, 1000 instances)";
    return {worst <= 1e-12, d.str()};
}

// ---------------------------------------------------------------------------
// 2. inequality suites

// Violation of lhs <= rhs beyond 1e-10 slack, relative to max(1, |lhs|, |rhs|).
double excess(double lhs, double rhs) {
    return (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

std::vector<double> power_sign(std::span<const double> v, int q) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::copysign(std::pow(std::abs(v[i]), q), v[i]);
    return out;
}

Verdict inequality_suites() {
    std::mt19937_64 gen(202);
    std::uniform_int_distribution<std::size_t> pick_n(2, 64);
    std::uniform_real_distribution<double> log_scale(-2.0, 0.5);
    struct Suite {
        const char* name;
        double worst = -INFINITY;
        int violations = 0;
        void add(double e) {
            worst = std::max(worst, e);
            if (e > 1e-10) ++violations;
        }
    };
    Suite poincare{"poincare"}, gradient{"gradient"}, lp2{"lp2"}, lp4{"lp4"}, lp6{"lp6"}, stability{"stability"},
        dissip{"dissipativity"}, contraction{"l1-contraction"};
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = pick_n(gen);
        const double sc = std::pow(10.0, log_scale(gen));
        const auto v = random_vector(gen, n, sc);
        const auto dpv = d1_plus(v.values());

        poincare.add(excess(norm(v.values()), norm(dpv)));
        gradient.add(excess(lp_norm(v, INFINITY), lp_norm(dpv, 1.0)));
        for (auto [p, suite] : {std::pair{2, &lp2}, std::pair{4, &lp4}, std::pair{6, &lp6}}) {
            const double lhs = dot(d1_plus(power_sign(v.values(), p - 1)), dpv);
            const double rhs = 4.0 * (p - 1) / (p * p) * std::pow(lp_norm(v, p), p);
            suite->add(excess(rhs, lhs));
        }

        const auto nf = random_flux(gen, t);
        const auto fd = flux_divergence(v.values(), nf);
        for (int q : {2, 4, 6}) stability.add(excess(0.0, dot(power_sign(v.values(), q - 1), fd)));

        const auto b = drift(v, nf, kNu);
        dissip.add(excess(dot(v.values(), b.values()), -kNu * std::pow(norm(dpv), 2)));

        // half of the pairs share some entries exactly
        auto w = random_vector(gen, n, sc);
        if (t % 2 == 1) {
            std::vector<double> wv(w.values().begin(), w.values().end());
            for (std::size_t k = 0; k < n; k += 2) wv[k] = v[k];
            w = GridVector::centred(GridSpec(n), wv);
        }
        const auto bw = drift(w, nf, kNu);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += sign(v[k] - w[k]) * (b[k] - bw[k]);
        contraction.add(excess(s / static_cast<double>(n), 0.0));
    }
    bool ok = true;
    std::ostringstream d;
    d << "violations:";
    for (const Suite* s : {&poincare, &gradient, &lp2, &lp4, &lp6, &stability, &dissip, &contraction}) {
        ok = ok && s->violations == 0;
        d << " " << s->name << "=" << s->violations;
    }
    d << " (1000 instances each, slack 1e-10)";
    return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 3. implicit stage

Verdict implicit_stage_suite() {
    std::mt19937_64 gen(303);
    std::uniform_int_distribution<std::size_t> pick_n(4, 64);
    std::uniform_real_distribution<double> log_dt(-10.0, -1.0);
    double worst_fb0 = -INFINITY, worst_gap = 0.0;
    int max_iter = 0, fb0_viol = 0, gap_viol = 0;
    for (double alpha : {0.0, 1.0}) {
        const auto nf = engquist_osher(burgers(alpha));
        for (int t = 0; t < 1000; ++t) {
            StepperConfig cfg;
            cfg.nu = kNu;
            cfg.dt = std::exp2(log_dt(gen));
            const std::size_t n = pick_n(gen);
            const auto v = random_vector(gen, n, 1.0);
            const auto a = implicit_stage(v, nf, cfg, v);
            const auto b = implicit_stage(v, nf, cfg, random_vector(gen, n, 3.0));
            max_iter = std::max({max_iter, a.iterations, b.iterations});
            // ||w||^2 <= ||v||^2 - 2 nu dt ||D+ w||^2 + 1e-10
            const double fb0 = std::pow(norm(a.w.values()), 2) - std::pow(norm(v.values()), 2) +
                               2 * cfg.nu * cfg.dt * std::pow(norm(d1_plus(a.w.values())), 2);
            worst_fb0 = std::max(worst_fb0, fb0);
            if (fb0 > 1e-10) ++fb0_viol;
            const double gap = norm((a.w - b.w).values());
            worst_gap = std::max(worst_gap, gap);
            if (gap > 10 * cfg.newton_tol) ++gap_viol;
        }
    }
    std::ostringstream d;
    d << "FB0 violations " << fb0_viol << " (worst excess " << fmt("%.1e", worst_fb0) << "), max Newton iterations "
      << max_iter << ", uniqueness gap " << fmt("%.1e", worst_gap) << " (<= 10 tol = 1e-11; 2x1000 instances)";
    return {fb0_viol == 0 && gap_viol == 0 && max_iter <= 50, d.str()};
}

// ---------------------------------------------------------------------------
// 4. coupled l1 contraction

Verdict coupled_contraction() {
    const std::size_t n = 32;
    const auto nf = engquist_osher(burgers(std::pow(kNu, 1.5)));
    const auto dn = discretize(NoiseModel::single_sine(), GridSpec(n));
    const auto u0 = project(Sinusoid{2.0, 1, Phase::sin}, GridSpec(n));
    const auto v0 = project(Sinusoid{-1.5, 3, Phase::cos}, GridSpec(n));
    double worst = -INFINITY, ratio = 0.0;
    int increases = 0;
    for (double dt : {std::ldexp(1.0, -10), std::ldexp(1.0, -6)}) {
        StepperConfig cfg;
        cfg.nu = kNu;
        cfg.dt = dt;
        const auto d = run_coupled_pair(u0, v0, 10000, nf, dn, cfg, RngStream(404, 0));
        for (std::size_t i = 1; i < d.size(); ++i) {
            worst = std::max(worst, d[i] - d[i - 1]);
            if (d[i] > d[i - 1] + 1e-10) ++increases;
        }
        ratio = std::max(ratio, d.back() / d.front());
    }
    std::ostringstream d;
    d << "steps with increase > 1e-10: " << increases << " (max step change " << fmt("%.1e", worst)
      << ", final/initial <= " << fmt("%.2e", ratio) << "; N=32, 1e4 steps, dt 2^-10 and 2^-6)";
    return {increases == 0, d.str()};
}

// ---------------------------------------------------------------------------
// 5. stationary value

Verdict stationary_value() {
    ErgodicSetup s;
    s.n_cells = 32;
    s.nu = kNu;
    s.dt = std::ldexp(1.0, -10);
    s.t_final = 64;
    s.replicas = 50;
    s.seed = 505;
    s.threads = 1;
    const auto r = ergodic_estimate(s, engquist_osher(burgers(0.0)), [](const GridVector& v) { return phi(v); });
    const double target = 0.89273;
    std::ostringstream d;
    d << "estimate " << fmt("%.5f", r.mean) << ", 95% CI [" << fmt("%.5f", r.ci_low) << ", " << fmt("%.5f", r.ci_high)
      << "] vs 0.89273 (N=32, dt=2^-10, T=64, M=50)";
    return {r.ci_low <= target && target <= r.ci_high, d.str()};
}

// ---------------------------------------------------------------------------
// 6. weak error

Verdict weak_error_order() {
    const AnalyticCase base(kNu, 1, 32);
    const double semi = stationary_phi(base, Discretisation::semi);
    std::vector<double> dts, an;
    for (int k = 8; k >= 1; --k) {
        dts.push_back(std::ldexp(1.0, -k));
        an.push_back(std::abs(stationary_phi(base.with_dt(dts.back()), Discretisation::split) - semi));
    }
    const double an_slope = loglog_slope(dts, an);
    const bool an_ok = an_slope >= 0.9 && an_slope <= 1.1;

    const double dt_ref = std::ldexp(1.0, -10);
    const double phi_ref = stationary_phi(base.with_dt(dt_ref), Discretisation::split);
    ErgodicSetup s;
    s.n_cells = 32;
    s.nu = kNu;
    s.t_final = 32;
    s.replicas = 20;
    s.seed = 606;
    s.threads = 1;
    const Observable f = [](const GridVector& v) { return phi(v); };

    bool mc_ok = true;
    double worst_z = 0.0;
    std::ostringstream nl;
    bool nl_ok = true;
    const double a0 = std::pow(kNu, 1.5);
    for (double alpha : {0.0, 0.01 * a0, a0, 100 * a0}) {
        const auto nf = engquist_osher(burgers(alpha));
        ErgodicSetup ref = s;
        ref.dt = dt_ref;
        const auto eref = ergodic_estimate(ref, nf, f);
        std::vector<double> x, y;
        for (double dt : dts) {
            ErgodicSetup e = s;
            e.dt = dt;
            e.substeps = static_cast<std::uint64_t>(std::llround(dt / dt_ref));
            const auto w = combine_paired_weak_error(ergodic_estimate(e, nf, f), eref, s.z);
            if (alpha == 0.0) {
                // the analytic curve with the same reference step
                const double expect = stationary_phi(base.with_dt(dt), Discretisation::split) - phi_ref;
                const double z = std::abs(w.difference - expect) / w.error.std_error;
                worst_z = std::max(worst_z, z);
                if (z > s.z) mc_ok = false;
            } else if (w.error.mean > 2 * w.error.std_error) {
                x.push_back(dt);
                y.push_back(w.error.mean);
            }
        }
        if (alpha != 0.0) {
            const double sl = x.size() >= 3 ? loglog_slope(x, y) : NAN;
            nl_ok = nl_ok && sl >= 0.7 && sl <= 1.3;
            nl << " " << fmt("%.3g", alpha) << ":" << fmt("%.3f", sl);
        }
    }
    std::ostringstream d;
    d << "analytic slope " << fmt("%.3f", an_slope) << " in [0.9,1.1]; MC alpha=0 vs analytic: max |diff|/se "
      << fmt("%.2f", worst_z) << " (<= 1.96, 8 dt, T=32, M=20); nonlinear slopes" << nl.str() << " in [0.7,1.3]";
    return {an_ok && mc_ok && nl_ok, d.str()};
}

// ---------------------------------------------------------------------------
// 7. spatial rate

Verdict spatial_rate() {
    // rank-one oracle for W2 between the continuum and semi-discrete invariant laws
    auto oracle = [](double n) {
        const double lam = 4 * kPi * kPi;
        const double lam_n = 4 * n * n * std::pow(std::sin(kPi / n), 2);
        const double g = std::pow(std::sin(kPi / n) / (kPi / n), 2);
        const double a2 = 1.0 / (2 * kNu * lam), b2 = 1.0 / (2 * kNu * lam_n);
        return std::sqrt(a2 + b2 * g - 2 * std::sqrt(a2 * b2) * g);
    };
    const double nw = 128 * w2_space(AnalyticCase(kNu, 1, 128));
    const double limit = 1.0 / std::sqrt(24 * kNu);
    const bool w_ok = std::abs(nw / 0.645497 - 1) <= 0.02 && std::abs(nw - 128 * oracle(128)) <= 1e-9;

    RefinementSetup r;
    r.ratio = 8;
    r.dt_coarse = r.dt_fine = 1.0 / 64;
    r.t_final = 1.0;
    r.nu = kNu;
    r.replicas = 32;
    r.seed = 707;
    r.threads = 1;
    std::vector<double> ns, errs;
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
        r.n_coarse = n;
        ns.push_back(static_cast<double>(n));
        errs.push_back(run_coupled_refinement(r, engquist_osher(burgers(0.0)), NoiseModel::single_sine()).mean);
    }
    const double slope = loglog_slope(ns, errs);
    const bool s_ok = slope >= -1.2 && slope <= -0.8;
    std::ostringstream d;
    d << "N*W2 at N=128 = " << fmt("%.6f", nw) << " (limit " << fmt("%.6f", limit) << ", off by "
      << fmt("%.2f", 100 * std::abs(nw / 0.645497 - 1)) << "%, tol 2%); strong-error slope " << fmt("%.3f", slope)
      << " in [-1.2,-0.8] (N=8..64, N_ref=8N, M=32)";
    return {w_ok && s_ok, d.str()};
}

// ---------------------------------------------------------------------------
// 8. stationary h1 bound

Verdict h1_bound() {
    const std::size_t n = 32;
    const double dt = std::ldexp(1.0, -6);
    const auto dn = discretize(NoiseModel::single_sine(), GridSpec(n));
    // D = sum_k ||D+ g^k||^2, recomputed here from the discrete mode
    const double dd = std::pow(norm(d1_plus(dn.g_vecs()[0].values())), 2);
    const double bound = dd / (2 * kNu) + dt * dd;
    bool ok = true;
    std::ostringstream d;
    for (double alpha : {0.0, std::pow(kNu, 1.5)}) {
        ErgodicSetup s;
        s.n_cells = n;
        s.nu = kNu;
        s.dt = dt;
        s.t_final = 64;
        s.burn_in = 0.0;
        s.replicas = 20;
        s.seed = 808;
        s.threads = 1;
        const auto r = ergodic_estimate(s, engquist_osher(burgers(alpha)), [](const GridVector& v) {
            return std::pow(lp_norm(d1_plus(v.values()), 2.0), 2);
        });
        ok = ok && r.mean <= bound + 3 * r.std_error;
        d << "alpha=" << fmt("%.4g", alpha) << ": " << fmt("%.3f", r.mean) << " +/- " << fmt("%.3f", r.std_error) << "; ";
    }
    d << "bound D/(2nu) + dt D = " << fmt("%.3f", bound) << " (T=64, N=32, dt=2^-6, M=20)";
    return {ok, d.str()};
}

// ---------------------------------------------------------------------------
// 9. determinism

Verdict determinism() {
    using Command = int (*)(const RunConfig&, const CommandOptions&, std::ostream&);
    struct Case {
        const char* name;
        Command cmd;
        std::vector<const char*> overrides;
    };
    const std::vector<Case> cases{
        {"simulate", cmd_simulate, {"T=4", "dt=0.015625", "alpha=1"}},
        {"ergodic", cmd_ergodic, {"T=4", "M=4", "dt=0.03125"}},
        {"weak-error", cmd_weak_error, {"T=2", "M=3", "dt_grid=[0.5, 0.25]", "dt_ref=0.0625"}},
        {"space-rate", cmd_space_rate, {"n_grid=[8, 16]", "monte_carlo=true", "refine_replicas=4"}},
        {"analytic", cmd_analytic, {}},
        {"selfcheck", cmd_selfcheck, {}},
    };
    bool ok = true;
    std::ostringstream d;
    for (const auto& c : cases) {
        RunConfig cfg;
        for (const char* o : c.overrides) apply_override(cfg, o);
        cfg.seed = 909;
        CommandOptions opt;
        opt.threads = 1;
        opt.check_instances = 200;
        std::ostringstream a, b;
        c.cmd(cfg, opt, a);
        c.cmd(cfg, opt, b);
        const bool same = !a.str().empty() && a.str() == b.str();
        ok = ok && same;
        d << c.name << (same ? " identical" : " DIFFERS") << "; ";
    }
    d << "seed 909, --threads 1";
    return {ok, d.str()};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> all{
        {1, "exact identities", exact_identities},
        {2, "inequality suites", inequality_suites},
        {3, "implicit stage", implicit_stage_suite},
        {4, "coupled l1 contraction", coupled_contraction},
        {5, "stationary value", stationary_value},
        {6, "weak-error order", weak_error_order},
        {7, "spatial rate", spatial_rate},
        {8, "stationary h1 bound", h1_bound},
        {9, "determinism", determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::printf("[%s] %d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
