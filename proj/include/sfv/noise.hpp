#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sfv/grid.hpp"

namespace sfv {

/// Counter-based normal stream. The draw for (seed, replica, step, mode) is a pure
/// function of the key, so replicas, coupled grids and resumed runs see the same
/// numbers. With `substeps = r`, step n aggregates the r fine draws
/// (n - 1) r + 1, ..., n r scaled by 1/sqrt(r), i.e. the coarse Brownian increment
/// over the same interval as fine steps (n - 1) r + 1 .. n r.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t step = 0,
              std::uint64_t substeps = 1)
        : seed_(seed), replica_(replica), step_(step), substeps_(substeps == 0 ? 1 : substeps) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t replica() const noexcept { return replica_; }
    std::uint64_t step() const noexcept { return step_; }
    std::uint64_t substeps() const noexcept { return substeps_; }

    /// Standard normals xi_1..xi_k for the current step.
    void normals(std::span<double> out) const;
    std::vector<double> normals(std::size_t n_modes) const;
    void advance() noexcept { ++step_; }

    RngStream with_replica(std::uint64_t replica) const noexcept {
        return RngStream(seed_, replica, step_, substeps_);
    }

    /// The underlying keyed draw.
    static double standard_normal(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                                  std::uint64_t mode);
    /// Uniform in (0, 1) from the top 53 bits of a keyed 64-bit hash.
    static double uniform(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                          std::uint64_t mode);

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t replica_ = 0;
    std::uint64_t step_ = 0;
    std::uint64_t substeps_ = 1;
};

/// Finite list of sinusoidal noise modes g^k on the torus.
struct NoiseModel {
    std::vector<Sinusoid> modes;
    std::uint64_t seed = 0;  ///< default seed handed to drivers; streams are keyed by the driver's seed

    /// Single mode sqrt(2) sin(2 pi m0 x).
    static NoiseModel single_sine(int m0 = 1, std::uint64_t seed = 0);
    /// Throws DomainError for m < 1 or non-finite amplitudes.
    void validate() const;
};

/// Per-grid noise vectors g^k = Pi_N g^k with covariance diagnostics.
class DiscreteNoise {
public:
    DiscreteNoise(GridSpec spec, std::vector<GridVector> g_vecs, double continuum_h2_trace);

    const GridSpec& spec() const noexcept { return spec_; }
    const std::vector<GridVector>& g_vecs() const noexcept { return g_; }
    std::size_t n_modes() const noexcept { return g_.size(); }

    /// D used in the energy bounds: sum_k ||D^(1,+) g^k||^2.
    double d_bound() const noexcept { return d_bound_; }
    /// sum_k ||g^k||_{H^2}^2 of the continuous modes.
    double continuum_h2_trace() const noexcept { return continuum_h2_trace_; }
    /// sum_k ||g^k||^2 (normalised l2).
    double sum_g_sq() const noexcept { return sum_g_sq_; }
    /// max_i sum_k (g^k_i)^2.
    double max_pointwise_variance() const noexcept { return max_pointwise_variance_; }

    /// Q_N = sum_k g^k (g^k)^T, built on each call.
    Eigen::MatrixXd q_matrix() const;

private:
    GridSpec spec_;
    std::vector<GridVector> g_;
    double d_bound_ = 0.0;
    double continuum_h2_trace_ = 0.0;
    double sum_g_sq_ = 0.0;
    double max_pointwise_variance_ = 0.0;
};

DiscreteNoise discretize(const NoiseModel& nm, const GridSpec& spec);

/// u += sqrt(dt) sum_k xi_k g^k, then re-centres u.
void add_increment(const DiscreteNoise& dn, double dt, std::span<const double> xi, std::span<double> u);

/// Delta W = sqrt(dt) sum_k xi_k g^k with xi drawn from the stream's current step.
GridVector sample_increment(const DiscreteNoise& dn, double dt, const RngStream& stream);

}  // namespace sfv
