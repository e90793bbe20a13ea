#include "sfv/stepper.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "sfv/error.hpp"
#include "sfv/parallel.hpp"

namespace sfv {

namespace {

constexpr int kMaxHalvings = 20;

double l2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

void StepperConfig::validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(newton_tol > 0.0)) throw DomainError("newton_tol must be positive");
    if (newton_max_iter < 1) throw DomainError("newton_max_iter must be >= 1");
    if (recentre_every < 1) throw DomainError("recentre_every must be >= 1");
}

TrajectoryState TrajectoryState::initial(GridVector u0, RngStream rng) {
    GridVector half = u0;
    return TrajectoryState{rng.step(), std::move(u0), std::move(half), rng};
}

ImplicitStageSolver::ImplicitStageSolver(const NumericalFlux& nf, StepperConfig cfg)
    : nf_(&nf), cfg_(cfg) {
    cfg_.validate();
}

double ImplicitStageSolver::residual(std::span<const double> v, std::span<const double> w,
                                     std::span<double> r) {
    apply_drift(w, *nf_, cfg_.nu, b_);
    for (std::size_t i = 0; i < w.size(); ++i) r[i] = w[i] - v[i] - cfg_.dt * b_[i];
    return l2(r);
}

NewtonStats ImplicitStageSolver::solve(std::span<const double> v, std::span<double> w) {
    const std::size_t n = v.size();
    if (w.size() != n) throw DomainError("implicit stage: size mismatch");
    r_.resize(n);
    r_try_.resize(n);
    delta_.resize(n);
    w_try_.resize(n);
    b_.resize(n);

    const double target = cfg_.newton_tol * (1.0 + l2(v));
    double rn = residual(v, w, r_);
    int it = 0;
    while (!(rn <= target)) {
        if (!std::isfinite(rn)) throw NonconvergenceError("implicit stage residual is not finite", rn, it);
        if (it >= cfg_.newton_max_iter) {
            throw NonconvergenceError("Newton did not converge in " + std::to_string(it) + " iterations",
                                      rn, it);
        }
        // (I - dt J) delta = -r
        fill_drift_jacobian(w, *nf_, cfg_.nu, jac_);
        for (std::size_t i = 0; i < n; ++i) {
            jac_.lower[i] *= -cfg_.dt;
            jac_.diag[i] = 1.0 - cfg_.dt * jac_.diag[i];
            jac_.upper[i] *= -cfg_.dt;
            r_[i] = -r_[i];
        }
        solve_cyclic(jac_, r_, delta_);

        double lambda = 1.0;
        bool accepted = false;
        double rt = rn;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            for (std::size_t i = 0; i < n; ++i) w_try_[i] = w[i] + lambda * delta_[i];
            rt = residual(v, w_try_, r_try_);
            if (rt < rn) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        ++it;
        if (!accepted) {
            throw NonconvergenceError("line search failed to reduce the residual", rn, it);
        }
        std::copy(w_try_.begin(), w_try_.end(), w.begin());
        r_.swap(r_try_);
        rn = rt;
    }
    recentre(w);
    return NewtonStats{it, rn};
}

GridVector implicit_stage(const GridVector& v, const NumericalFlux& nf, const StepperConfig& cfg) {
    return implicit_stage(v, nf, cfg, v).w;
}

ImplicitStageResult implicit_stage(const GridVector& v, const NumericalFlux& nf, const StepperConfig& cfg,
                                   const GridVector& initial_guess) {
    if (!(initial_guess.spec() == v.spec())) throw DomainError("initial guess on a different grid");
    ImplicitStageSolver solver(nf, cfg);
    std::vector<double> w(initial_guess.values().begin(), initial_guess.values().end());
    const auto stats = solver.solve(v.values(), w);
    return ImplicitStageResult{GridVector(v.spec(), std::move(w)), stats.iterations, stats.residual};
}

Stepper::Stepper(const NumericalFlux& nf, const DiscreteNoise& dn, StepperConfig cfg)
    : solver_(nf, cfg), dn_(&dn), xi_(dn.n_modes()) {}

void Stepper::step(TrajectoryState& state) {
    RngStream next = state.rng;
    next.advance();
    next.normals(xi_);
    step_with(state, xi_);
    state.rng = next;
}

void Stepper::step_with(TrajectoryState& state, std::span<const double> xi) {
    const auto& spec = state.u.spec();
    if (!(spec == dn_->spec())) throw DomainError("state and noise live on different grids");
    if (xi.size() != dn_->n_modes()) throw DomainError("wrong number of normals");
    const std::uint64_t next_n = state.n + 1;
    half_.assign(state.u.values().begin(), state.u.values().end());
    try {
        last_iterations_ = solver_.solve(state.u.values(), half_).iterations;
    } catch (const NonconvergenceError& e) {
        throw StepError(std::string("step ") + std::to_string(next_n) + ": " + e.what(), next_n,
                        state.rng.replica());
    } catch (const SolverError& e) {
        throw StepError(std::string("step ") + std::to_string(next_n) + ": " + e.what(), next_n,
                        state.rng.replica());
    }
    state.u_half = GridVector(spec, half_);
    add_increment(*dn_, config().dt, xi, half_);
    if (next_n % static_cast<std::uint64_t>(config().recentre_every) == 0) {
        const double m = mean(half_);
        for (double& x : half_) x -= m;
    }
    state.u = GridVector(spec, half_);
    state.n = next_n;
}

TrajectoryState step(const TrajectoryState& state, const NumericalFlux& nf, const DiscreteNoise& dn,
                     const StepperConfig& cfg) {
    Stepper stepper(nf, dn, cfg);
    TrajectoryState next = state;
    stepper.step(next);
    return next;
}

void advance(TrajectoryState& state, std::uint64_t n_steps, Stepper& stepper,
             const std::vector<Observer>& observers) {
    for (std::uint64_t s = 0; s < n_steps; ++s) {
        stepper.step(state);
        for (const auto& obs : observers) {
            if (obs.stride > 0 && state.n % obs.stride == 0) obs.callback(state);
        }
    }
}

TrajectoryState run_trajectory(const GridVector& u0, std::uint64_t n_steps, const NumericalFlux& nf,
                               const DiscreteNoise& dn, const StepperConfig& cfg, RngStream stream,
                               const std::vector<Observer>& observers) {
    Stepper stepper(nf, dn, cfg);
    auto state = TrajectoryState::initial(u0, stream);
    for (const auto& obs : observers) {
        if (obs.stride > 0 && state.n % obs.stride == 0) obs.callback(state);
    }
    advance(state, n_steps, stepper, observers);
    return state;
}

std::vector<double> run_coupled_pair(const GridVector& u0, const GridVector& v0, std::uint64_t n_steps,
                                     const NumericalFlux& nf, const DiscreteNoise& dn,
                                     const StepperConfig& cfg, RngStream stream) {
    if (!(u0.spec() == v0.spec())) throw DomainError("coupled pair needs a common grid");
    Stepper su(nf, dn, cfg);
    Stepper sv(nf, dn, cfg);
    auto a = TrajectoryState::initial(u0, stream);
    auto b = TrajectoryState::initial(v0, stream);
    std::vector<double> dist;
    dist.reserve(n_steps + 1);
    dist.push_back(lp_norm(a.u - b.u, 1.0));
    std::vector<double> xi(dn.n_modes());
    for (std::uint64_t s = 0; s < n_steps; ++s) {
        RngStream next = a.rng;
        next.advance();
        next.normals(xi);
        su.step_with(a, xi);
        sv.step_with(b, xi);
        a.rng = next;
        b.rng = next;
        dist.push_back(lp_norm(a.u - b.u, 1.0));
    }
    return dist;
}

StrongErrorResult run_coupled_refinement(const RefinementSetup& setup, const NumericalFlux& nf,
                                         const NoiseModel& noise) {
    if (setup.ratio < 1) throw DomainError("refinement ratio must be >= 1");
    if (setup.replicas < 2) throw DomainError("refinement needs at least 2 replicas");
    if (!(setup.dt_fine > 0.0) || !(setup.dt_coarse >= setup.dt_fine)) {
        throw DomainError("refinement needs 0 < dt_fine <= dt_coarse");
    }
    const double ratio_t = setup.dt_coarse / setup.dt_fine;
    const auto substeps = static_cast<std::uint64_t>(std::llround(ratio_t));
    if (std::abs(ratio_t - static_cast<double>(substeps)) > 1e-9 * ratio_t) {
        throw DomainError("dt_fine must divide dt_coarse");
    }
    const double steps_real = setup.t_final / setup.dt_coarse;
    const auto n_coarse_steps = static_cast<std::uint64_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(n_coarse_steps)) > 1e-9 * std::max(1.0, steps_real)) {
        throw DomainError("t_final must be a multiple of dt_coarse");
    }

    const GridSpec coarse(setup.n_coarse);
    const GridSpec fine(setup.n_coarse * setup.ratio);
    const auto dn_c = discretize(noise, coarse);
    const auto dn_f = discretize(noise, fine);
    StepperConfig cc;
    cc.nu = setup.nu;
    cc.dt = setup.dt_coarse;
    StepperConfig cf = cc;
    cf.dt = setup.dt_fine;

    StrongErrorResult out;
    out.per_replica.assign(setup.replicas, 0.0);
    parallel_for(setup.replicas, setup.threads, [&](std::size_t r) {
        const auto uc = run_trajectory(GridVector::zeros(coarse), n_coarse_steps, nf, dn_c, cc,
                                       RngStream(setup.seed, r, 0, substeps));
        const auto uf = run_trajectory(GridVector::zeros(fine), n_coarse_steps * substeps, nf, dn_f, cf,
                                       RngStream(setup.seed, r, 0, 1));
        out.per_replica[r] = l2_distance(reconstruct(uc.u, 0), reconstruct(uf.u, 0));
    });
    double s = 0.0;
    for (double e : out.per_replica) s += e;
    out.mean = s / static_cast<double>(setup.replicas);
    double ss = 0.0;
    for (double e : out.per_replica) ss += (e - out.mean) * (e - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(setup.replicas - 1) /
                              static_cast<double>(setup.replicas));
    return out;
}

void write_checkpoint(std::ostream& os, const TrajectoryState& state) {
    write_snapshot(os, state.u);
    write_u64(os, state.n);
    write_u64(os, state.rng.seed());
    write_u64(os, state.rng.replica());
    write_u64(os, state.rng.step());
    write_u64(os, state.rng.substeps());
    if (!os) throw Error("checkpoint write failed");
}

TrajectoryState read_checkpoint(std::istream& is) {
    GridVector u = read_snapshot(is);
    const auto n = read_u64(is);
    const auto seed = read_u64(is);
    const auto replica = read_u64(is);
    const auto rng_step = read_u64(is);
    const auto substeps = read_u64(is);
    if (!is) throw Error("truncated checkpoint");
    GridVector half = u;
    return TrajectoryState{n, std::move(u), std::move(half), RngStream(seed, replica, rng_step, substeps)};
}

}  // namespace sfv
