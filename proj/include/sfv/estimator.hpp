#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sfv/flux.hpp"
#include "sfv/grid.hpp"
#include "sfv/noise.hpp"
#include "sfv/stepper.hpp"

namespace sfv {

/// Phi(v) = exp(-||v||^2_{l2}).
double phi(std::span<const double> v);
double phi(const GridVector& v);

using Observable = std::function<double(const GridVector&)>;

struct EstimatorResult {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_replicas = 0;
    double horizon = 0.0;
    double burn_in = 0.0;
    std::vector<double> replica_means;  ///< in replica-id order
};

/// mean, standard error of the mean and mean -/+ z se from per-replica values.
EstimatorResult summarize(std::vector<double> replica_values, double z = 1.96);

/// Inputs of one ergodic experiment. The initial state is zero unless u0 is set.
struct ErgodicSetup {
    std::size_t n_cells = 32;
    double nu = 0.1;
    double dt = 1.0 / 1024.0;
    double t_final = 256.0;
    std::optional<double> burn_in;  ///< default 10% of t_final
    std::size_t replicas = 200;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  ///< 0 = all cores
    double z = 1.96;
    NoiseModel noise = NoiseModel::single_sine();
    std::optional<Sinusoid> u0;
    /// Record the replica-averaged running mean every this many steps (0 = never).
    std::uint64_t record_every = 0;
    /// Each increment aggregates this many finer draws, so the run shares its Brownian
    /// path with a run at dt / substeps and the same seed.
    std::uint64_t substeps = 1;

    double effective_burn_in() const { return burn_in ? *burn_in : 0.1 * t_final; }
    /// Throws DomainError unless T > burn_in >= 0, M >= 2, dt > 0 and T/dt >= 1 step after burn-in.
    void validate() const;
};

struct ErgodicOutput {
    EstimatorResult result;
    std::vector<double> record_times;  ///< t of each running-average record
    std::vector<double> running_mean;  ///< replica mean of the running average at those times
};

/// Each replica m runs the split-step chain from u0 and averages the observable over
/// the steps l with l dt > burn_in, l dt <= T. Replicas run in parallel; the reduction
/// is done in replica order, so the result does not depend on the thread count.
/// A stepper failure is rethrown as StepError carrying the replica id.
ErgodicOutput ergodic_run(const ErgodicSetup& setup, const NumericalFlux& nf, const Observable& obs);
EstimatorResult ergodic_estimate(const ErgodicSetup& setup, const NumericalFlux& nf,
                                 const Observable& obs);

struct WeakErrorResult {
    EstimatorResult error;      ///< |m - m_ref| with std errors added in quadrature
    double difference = 0.0;    ///< signed m - m_ref
    EstimatorResult estimate;   ///< at dt
    EstimatorResult reference;  ///< at dt_ref
};

/// Combines two independent estimates into the weak-error estimate.
WeakErrorResult combine_weak_error(const EstimatorResult& est, const EstimatorResult& ref, double z = 1.96);
/// Same for estimates whose replicas share Brownian paths: the standard error comes from
/// the per-replica differences.
WeakErrorResult combine_paired_weak_error(const EstimatorResult& est, const EstimatorResult& ref,
                                          double z = 1.96);

/// Phi-estimates at dt (seed) and dt_ref (seed_ref) with the remaining setup shared.
/// seed_ref defaults to seed + 1; dt == dt_ref with equal seeds gives exactly 0.
WeakErrorResult weak_error(const ErgodicSetup& common, const NumericalFlux& nf, double dt, double dt_ref,
                           std::optional<std::uint64_t> seed_ref = std::nullopt);

/// Same estimate with both runs driven by one Brownian path per replica (dt must be an
/// integer multiple of dt_ref). The standard error comes from the per-replica differences.
WeakErrorResult weak_error_coupled(const ErgodicSetup& common, const NumericalFlux& nf, double dt,
                                   double dt_ref);

/// Ordinary least-squares slope of log y against log x. Throws DomainError for
/// fewer than two points or non-positive values.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace sfv
