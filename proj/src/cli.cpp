#include "sfv/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "sfv/analytic.hpp"
#include "sfv/checks.hpp"
#include "sfv/error.hpp"
#include "sfv/estimator.hpp"
#include "sfv/flux.hpp"
#include "sfv/noise.hpp"
#include "sfv/stepper.hpp"

namespace sfv {

namespace {

void header(std::ostream& out, const std::string& command, const RunConfig& cfg) {
    out << "# sfv " << command << "\n";
    std::istringstream lines(cfg.echo());
    for (std::string line; std::getline(lines, line);) out << "# " << line << "\n";
}

std::string fmt(double x) { return format_double(x); }

std::uint64_t steps_for(double t, double dt) { return static_cast<std::uint64_t>(std::llround(t / dt)); }

/// The analytic oracle applies to a single sinusoidal mode.
std::optional<AnalyticCase> analytic_case(const RunConfig& cfg, std::size_t n, std::optional<double> dt) {
    if (cfg.noise.modes.size() != 1) return std::nullopt;
    const auto& mode = cfg.noise.modes.front();
    return AnalyticCase(cfg.nu, mode.m, n, dt, mode.amp);
}

const Sinusoid& single_mode(const RunConfig& cfg, const char* command) {
    if (cfg.noise.modes.size() != 1) {
        throw ConfigError(std::string(command) + " needs exactly one noise mode", 0, "noise");
    }
    return cfg.noise.modes.front();
}

ErgodicSetup ergodic_setup(const RunConfig& cfg, const CommandOptions& opt) {
    ErgodicSetup s;
    s.n_cells = cfg.n_cells;
    s.nu = cfg.nu;
    s.dt = cfg.dt;
    s.t_final = cfg.t_final;
    s.burn_in = cfg.burn_in;
    s.replicas = cfg.replicas;
    s.seed = cfg.seed;
    s.threads = opt.threads;
    s.z = cfg.z;
    s.noise = cfg.noise;
    s.u0 = cfg.u0;
    return s;
}

// dt / dt_ref when it is a positive integer.
std::optional<std::uint64_t> substeps_between(double dt, double dt_ref) {
    const double ratio = dt / dt_ref;
    const auto r = std::llround(ratio);
    if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9 * ratio) return std::nullopt;
    return static_cast<std::uint64_t>(r);
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    cfg.validate();
    const GridSpec spec(cfg.n_cells);
    const auto nf = engquist_osher(cfg.flux_model(cfg.alpha()));
    const auto dn = discretize(cfg.noise, spec);
    StepperConfig sc;
    sc.nu = cfg.nu;
    sc.dt = cfg.dt;
    sc.validate();

    auto state = [&] {
        if (opt.resume) {
            std::ifstream in(*opt.resume, std::ios::binary);
            if (!in) throw ConfigError("cannot open checkpoint " + *opt.resume, 0, "resume");
            auto s = read_checkpoint(in);
            if (s.u.size() != cfg.n_cells) throw ConfigError("checkpoint grid does not match n_cells", 0, "resume");
            return s;
        }
        const GridVector u0 = cfg.u0 ? project(*cfg.u0, spec) : GridVector::zeros(spec);
        return TrajectoryState::initial(u0, RngStream(cfg.seed, 0));
    }();

    header(out, "simulate", cfg);
    out << "t,energy,h1_seminorm,phi,linf\n";
    Stepper stepper(nf, dn, sc);
    const Observer row{cfg.stride, [&](const TrajectoryState& st) {
                           const double e = lp_norm(st.u, 2.0);
                           const double h1 = lp_norm(d1_plus(st.u.values()), 2.0);
                           out << fmt(static_cast<double>(st.n) * cfg.dt) << ',' << fmt(e * e) << ','
                               << fmt(h1) << ',' << fmt(phi(st.u)) << ',' << fmt(lp_norm(st.u, INFINITY))
                               << '\n';
                       }};
    // T is the absolute end time, also after --resume
    const std::uint64_t total = steps_for(cfg.t_final, cfg.dt);
    advance(state, total > state.n ? total - state.n : 0, stepper, {row});

    if (opt.checkpoint_out) {
        std::ofstream ck(*opt.checkpoint_out, std::ios::binary);
        if (!ck) throw ConfigError("cannot write checkpoint " + *opt.checkpoint_out, 0, "checkpoint");
        write_checkpoint(ck, state);
    }
    return kExitOk;
}

int cmd_ergodic(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    cfg.validate();
    const auto alphas = cfg.regime_alphas();
    auto setup = ergodic_setup(cfg, opt);
    setup.record_every = std::max<std::uint64_t>(1, steps_for(cfg.record_dt, cfg.dt));
    const Observable f = [](const GridVector& v) { return phi(v); };

    std::vector<ErgodicOutput> runs;
    for (double a : alphas) runs.push_back(ergodic_run(setup, engquist_osher(cfg.flux_model(a)), f));

    std::optional<double> analytic;
    bool has_linear = false;
    for (double a : alphas) has_linear = has_linear || a == 0.0;
    if (has_linear && cfg.flux.kind == "burgers") {
        if (auto c = analytic_case(cfg, cfg.n_cells, cfg.dt)) analytic = stationary_phi(*c, Discretisation::split);
    }

    header(out, "ergodic", cfg);
    out << "t";
    for (double a : alphas) out << ",alpha=" << fmt(a);
    if (analytic) out << ",analytic";
    out << "\n";
    const auto& times = runs.front().record_times;
    for (std::size_t j = 0; j < times.size(); ++j) {
        out << fmt(times[j]);
        for (const auto& r : runs) out << ',' << fmt(r.running_mean[j]);
        if (analytic) out << ',' << fmt(*analytic);
        out << "\n";
    }
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const auto& r = runs[i].result;
        out << "# final alpha=" << fmt(alphas[i]) << " mean=" << fmt(r.mean) << " std_error=" << fmt(r.std_error)
            << " ci_low=" << fmt(r.ci_low) << " ci_high=" << fmt(r.ci_high) << " replicas=" << r.n_replicas
            << " T=" << fmt(r.horizon) << " burn_in=" << fmt(r.burn_in) << "\n";
    }
    return kExitOk;
}

int cmd_weak_error(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    cfg.validate();
    const auto alphas = cfg.regime_alphas();
    const auto common = ergodic_setup(cfg, opt);
    const Observable f = [](const GridVector& v) { return phi(v); };

    header(out, "weak-error", cfg);
    out << "alpha,dt,mean,std_error,ci_low,ci_high,analytic_value\n";
    std::ostringstream slopes;
    for (double a : alphas) {
        const auto nf = engquist_osher(cfg.flux_model(a));
        // paired reference: same seed, so the coarse runs below can reuse its Brownian path
        ErgodicSetup ref_setup = common;
        ref_setup.dt = cfg.dt_ref;
        const auto paired_ref = cfg.couple_paths ? std::optional(ergodic_estimate(ref_setup, nf, f)) : std::nullopt;
        std::optional<EstimatorResult> indep_ref;
        auto independent_ref = [&]() -> const EstimatorResult& {
            if (!indep_ref) {
                ErgodicSetup r = ref_setup;
                r.seed = cfg.seed + 1;
                indep_ref = ergodic_estimate(r, nf, f);
            }
            return *indep_ref;
        };

        const bool linear = a == 0.0 && cfg.flux.kind == "burgers";
        std::optional<AnalyticCase> ac;
        if (linear) ac = analytic_case(cfg, cfg.n_cells, cfg.dt_ref);

        std::vector<double> mc_dt, mc_err, an_dt, an_err;
        for (double dt : cfg.dt_grid) {
            ErgodicSetup s = common;
            s.dt = dt;
            const auto r = substeps_between(dt, cfg.dt_ref);
            WeakErrorResult w;
            if (paired_ref && r) {
                s.substeps = *r;
                w = combine_paired_weak_error(ergodic_estimate(s, nf, f), *paired_ref, cfg.z);
            } else {
                w = combine_weak_error(ergodic_estimate(s, nf, f), independent_ref(), cfg.z);
            }
            out << fmt(a) << ',' << fmt(dt) << ',' << fmt(w.error.mean) << ',' << fmt(w.error.std_error) << ','
                << fmt(w.error.ci_low) << ',' << fmt(w.error.ci_high) << ',';
            if (ac) {
                const double v = std::abs(stationary_phi(ac->with_dt(dt), Discretisation::split) -
                                          stationary_phi(*ac, Discretisation::split));
                out << fmt(v);
                an_dt.push_back(dt);
                an_err.push_back(v);
            }
            out << "\n";
            if (w.error.mean > 2.0 * w.error.std_error) {
                mc_dt.push_back(dt);
                mc_err.push_back(w.error.mean);
            }
        }
        slopes << "# slope alpha=" << fmt(a) << " monte_carlo="
               << (mc_dt.size() >= 3 ? fmt(loglog_slope(mc_dt, mc_err)) : std::string("nan"))
               << " points=" << mc_dt.size();
        if (an_dt.size() >= 2) slopes << " analytic=" << fmt(loglog_slope(an_dt, an_err));
        slopes << "\n";
    }
    out << slopes.str();
    return kExitOk;
}

int cmd_space_rate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    cfg.validate();
    const auto& mode = single_mode(cfg, "space-rate");
    const double limit = std::abs(mode.amp) / (std::sqrt(2.0) * std::sqrt(24.0 * cfg.nu));
    const auto nf = engquist_osher(cfg.flux_model(cfg.alpha()));

    header(out, "space-rate", cfg);
    out << "N,w2_space,N_w2_space,limit";
    if (cfg.monte_carlo) out << ",strong_error,strong_std_error";
    out << "\n";
    std::vector<double> ns, errs;
    for (std::size_t n : cfg.n_grid) {
        const AnalyticCase c(cfg.nu, mode.m, n, std::nullopt, mode.amp);
        const double w = w2_space(c);
        out << n << ',' << fmt(w) << ',' << fmt(static_cast<double>(n) * w) << ',' << fmt(limit);
        if (cfg.monte_carlo) {
            RefinementSetup rs;
            rs.n_coarse = n;
            rs.ratio = cfg.refine_ratio;
            rs.dt_coarse = cfg.refine_dt;
            rs.dt_fine = cfg.refine_dt;
            rs.t_final = cfg.refine_t;
            rs.nu = cfg.nu;
            rs.replicas = cfg.refine_replicas;
            rs.seed = cfg.seed;
            rs.threads = opt.threads;
            const auto se = run_coupled_refinement(rs, nf, cfg.noise);
            out << ',' << fmt(se.mean) << ',' << fmt(se.std_error);
            ns.push_back(static_cast<double>(n));
            errs.push_back(se.mean);
        }
        out << "\n";
    }
    if (cfg.monte_carlo && ns.size() >= 2) {
        bool positive = true;
        for (double e : errs) positive = positive && e > 0.0;
        out << "# strong_error_slope=" << (positive ? fmt(loglog_slope(ns, errs)) : std::string("nan")) << "\n";
    }
    return kExitOk;
}

int cmd_analytic(const RunConfig& cfg, const CommandOptions&, std::ostream& out) {
    cfg.validate();
    const auto& mode = single_mode(cfg, "analytic");
    const AnalyticCase c(cfg.nu, mode.m, cfg.n_cells, cfg.dt, mode.amp);
    const GridSpec spec(cfg.n_cells);
    const auto dn = discretize(cfg.noise, spec);
    const double gw2 = gaussian_w2(lyapunov_covariance(dn, cfg.nu), lyapunov_covariance(dn, cfg.nu, cfg.dt));

    header(out, "analytic", cfg);
    out << "quantity,value\n";
    auto row = [&](const char* name, double v) { out << name << ',' << fmt(v) << "\n"; };
    row("lambda", c.lambda());
    row("lambda_n", c.lambda_n());
    row("g_norm_sq", c.g_norm_sq());
    row("kappa_n", c.kappa_n());
    row("kappa_n_dt", c.kappa_n_dt());
    row("epsilon_n", c.epsilon_n());
    row("phi_semi", stationary_phi(c, Discretisation::semi));
    row("phi_split", stationary_phi(c, Discretisation::split));
    row("w2_space", w2_space(c));
    row("n_w2_space", static_cast<double>(cfg.n_cells) * w2_space(c));
    row("n_w2_space_limit", std::abs(mode.amp) / (std::sqrt(2.0) * std::sqrt(24.0 * cfg.nu)));
    row("w2_time", w2_time(c));
    row("w2_time_over_dt", w2_time(c) / cfg.dt);
    row("w2_time_covariance", gw2);
    row("d_bound", dn.d_bound());
    row("h2_trace", dn.continuum_h2_trace());
    return kExitOk;
}

int cmd_selfcheck(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    CheckOptions co;
    co.instances = opt.check_instances;
    co.seed = cfg.seed;
    co.sign = opt.sign;
    const auto results = run_selfchecks(co);
    out << "# sfv selfcheck\n";
    out << "# sign_mutation = "
        << (opt.sign == SignConvention::standard        ? "none"
            : opt.sign == SignConvention::zero_negative ? "zero_negative"
                                                        : "reversed")
        << "\n";
    out << "check,status,worst,detail\n";
    bool ok = true;
    for (const auto& r : results) {
        ok = ok && r.passed;
        out << r.name << ',' << (r.passed ? "PASS" : "FAIL") << ',' << fmt(r.worst) << ',' << csv_quote(r.detail)
            << "\n";
    }
    out << "# " << results.size() << " checks, " << (ok ? "all passed" : "FAILURES") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

std::string gnuplot_script(const std::string& command, const std::string& csv_path, const RunConfig& cfg) {
    std::ostringstream g;
    g << "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n";
    if (command == "simulate") {
        g << "set xlabel 't'\nplot '" << csv_path << "' using 1:2 with lines, '' using 1:4 with lines\n";
    } else if (command == "ergodic") {
        const auto n = cfg.regime_alphas().size();
        g << "set xlabel 't'\nset ylabel 'running average of Phi'\nplot for [c=2:" << n + 2 << "] '" << csv_path
          << "' using 1:c with lines\n";
    } else if (command == "weak-error") {
        g << "set logscale xy\nset xlabel 'dt'\nset ylabel 'weak error'\n"
          << "plot '" << csv_path << "' using 2:3:5:6 with yerrorbars title 'Monte Carlo', '' using 2:7 with "
          << "linespoints title 'analytic'\n";
    } else if (command == "space-rate") {
        g << "set logscale xy\nset xlabel 'N'\nplot '" << csv_path << "' using 1:2 with linespoints";
        if (cfg.monte_carlo) g << ", '' using 1:5 with linespoints";
        g << "\n";
    } else {
        return {};
    }
    return g.str();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const ResolutionError*>(&e) || dynamic_cast<const NormalizationError*>(&e) ||
        dynamic_cast<const InvalidFunctionError*>(&e) || dynamic_cast<const IllPosedError*>(&e)) {
        return kExitConfig;
    }
    return kExitNumerical;
}

}  // namespace sfv
