#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sfv/flux.hpp"
#include "sfv/grid.hpp"
#include "sfv/linops.hpp"
#include "sfv/noise.hpp"

namespace sfv {

struct StepperConfig {
    double nu = 0.1;
    double dt = 1.0 / 1024.0;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    int recentre_every = 64;

    /// Throws DomainError unless nu, dt, newton_tol > 0 and the counts are positive.
    void validate() const;
};

struct TrajectoryState {
    std::uint64_t n = 0;  ///< step index
    GridVector u;         ///< U_n
    GridVector u_half;    ///< most recent U_{n-1/2} (equal to u before the first step)
    RngStream rng;        ///< rng.step() == n: the last increment used was Delta W_n

    static TrajectoryState initial(GridVector u0, RngStream rng);
};

struct NewtonStats {
    int iterations = 0;
    double residual = 0.0;  ///< ||w - v - dt b(w)||_{l2}
};

struct ImplicitStageResult {
    GridVector w;
    int iterations = 0;
    double residual = 0.0;  ///< ||w - v - dt b(w)||_{l2}
};

/// Damped Newton solver for w = v + dt b(w) with reusable scratch buffers.
/// Jacobian I - dt Db(w) is a cyclic tridiagonal M-matrix; a step is accepted as soon
/// as the l2 residual strictly decreases (at most 20 halvings).
class ImplicitStageSolver {
public:
    ImplicitStageSolver(const NumericalFlux& nf, StepperConfig cfg);

    /// Solves in place: `w` holds the initial guess on entry and the root on exit.
    /// Throws NonconvergenceError carrying the last residual.
    NewtonStats solve(std::span<const double> v, std::span<double> w);

    const StepperConfig& config() const noexcept { return cfg_; }

private:
    double residual(std::span<const double> v, std::span<const double> w, std::span<double> r);

    const NumericalFlux* nf_;
    StepperConfig cfg_;
    std::vector<double> r_, r_try_, delta_, w_try_, b_;
    CyclicTridiag jac_;
};

/// The implicit half-step U_{n+1/2} = U_n + dt b(U_{n+1/2}), started from w0 = v.
GridVector implicit_stage(const GridVector& v, const NumericalFlux& nf, const StepperConfig& cfg);
/// Same, with an explicit initial guess and iteration diagnostics.
ImplicitStageResult implicit_stage(const GridVector& v, const NumericalFlux& nf,
                                   const StepperConfig& cfg, const GridVector& initial_guess);

/// Split-step backward Euler: implicit drift stage, then the noise increment.
class Stepper {
public:
    Stepper(const NumericalFlux& nf, const DiscreteNoise& dn, StepperConfig cfg);

    /// Advances one step. Solver failures are rethrown as StepError with the step index.
    void step(TrajectoryState& state);
    /// Same as step() but with the normals supplied by the caller.
    void step_with(TrajectoryState& state, std::span<const double> xi);

    const StepperConfig& config() const noexcept { return solver_.config(); }
    const DiscreteNoise& noise() const noexcept { return *dn_; }
    int last_iterations() const noexcept { return last_iterations_; }

private:
    ImplicitStageSolver solver_;
    const DiscreteNoise* dn_;
    std::vector<double> half_, xi_;
    int last_iterations_ = 0;
};

TrajectoryState step(const TrajectoryState& state, const NumericalFlux& nf, const DiscreteNoise& dn,
                     const StepperConfig& cfg);

/// Observer invoked at n = 0 and then every `stride` steps.
struct Observer {
    std::uint64_t stride = 1;
    std::function<void(const TrajectoryState&)> callback;
};

TrajectoryState run_trajectory(const GridVector& u0, std::uint64_t n_steps, const NumericalFlux& nf,
                               const DiscreteNoise& dn, const StepperConfig& cfg, RngStream stream,
                               const std::vector<Observer>& observers = {});

/// Continues an existing state for n_steps more steps.
void advance(TrajectoryState& state, std::uint64_t n_steps, Stepper& stepper,
             const std::vector<Observer>& observers = {});

/// Two trajectories driven by identical increments; returns ||U_n - V_n||_{l1}
/// for n = 0..n_steps.
std::vector<double> run_coupled_pair(const GridVector& u0, const GridVector& v0, std::uint64_t n_steps,
                                     const NumericalFlux& nf, const DiscreteNoise& dn,
                                     const StepperConfig& cfg, RngStream stream);

struct RefinementSetup {
    std::size_t n_coarse = 8;
    std::size_t ratio = 2;      ///< N_ref = ratio * n_coarse
    double dt_coarse = 1.0 / 64.0;
    double dt_fine = 1.0 / 64.0;  ///< must divide dt_coarse
    double t_final = 1.0;
    double nu = 0.1;
    std::size_t replicas = 32;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct StrongErrorResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> per_replica;
};

/// Runs a coarse and a refined grid with the same Brownian path and returns the
/// replica average of ||Psi_N U^N(T) - Psi_Nref U^Nref(T)||_{L2}; both start at 0.
StrongErrorResult run_coupled_refinement(const RefinementSetup& setup, const NumericalFlux& nf,
                                         const NoiseModel& noise);

/// Checkpoint: grid snapshot of U_n, then u64 step index, u64 seed, u64 replica,
/// u64 rng step and u64 substeps, all little-endian.
void write_checkpoint(std::ostream& os, const TrajectoryState& state);
TrajectoryState read_checkpoint(std::istream& is);

}  // namespace sfv
