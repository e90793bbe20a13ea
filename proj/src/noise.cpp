#include "sfv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "sfv/error.hpp"

namespace sfv {

namespace {

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                            std::uint64_t mode) noexcept {
    std::uint64_t h = mix(seed ^ 0x5f3759df00000000ULL);
    h = mix(h ^ replica);
    h = mix(h ^ (step * 0xd6e8feb86659fd93ULL));
    return mix(h ^ (mode + 0x632be59bd9b4e019ULL));
}

const boost::math::normal_distribution<double> kStdNormal{};

}  // namespace

double RngStream::uniform(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                          std::uint64_t mode) {
    const std::uint64_t bits = key(seed, replica, step, mode) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
                                  std::uint64_t mode) {
    return boost::math::quantile(kStdNormal, uniform(seed, replica, step, mode));
}

void RngStream::normals(std::span<double> out) const {
    if (substeps_ == 1) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = standard_normal(seed_, replica_, step_, k);
        return;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(substeps_));
    for (std::size_t k = 0; k < out.size(); ++k) {
        double s = 0.0;
        for (std::uint64_t j = 0; j < substeps_; ++j) {
            s += standard_normal(seed_, replica_, step_ * substeps_ - j, k);
        }
        out[k] = scale * s;
    }
}

std::vector<double> RngStream::normals(std::size_t n_modes) const {
    std::vector<double> out(n_modes);
    normals(out);
    return out;
}

NoiseModel NoiseModel::single_sine(int m0, std::uint64_t seed) {
    return NoiseModel{{Sinusoid{std::numbers::sqrt2, m0, Phase::sin}}, seed};
}

void NoiseModel::validate() const {
    for (const auto& mode : modes) {
        if (mode.m < 1) throw DomainError("noise mode frequency must be >= 1");
        if (!std::isfinite(mode.amp)) throw DomainError("noise amplitude must be finite");
    }
}

DiscreteNoise::DiscreteNoise(GridSpec spec, std::vector<GridVector> g_vecs, double continuum_h2_trace)
    : spec_(spec), g_(std::move(g_vecs)), continuum_h2_trace_(continuum_h2_trace) {
    std::vector<double> pointwise(spec_.n_cells(), 0.0);
    for (const auto& g : g_) {
        if (!(g.spec() == spec_)) throw DomainError("noise vector on a different grid");
        const double dg = lp_norm(d1_plus(g.values()), 2.0);
        d_bound_ += dg * dg;
        const double ng = lp_norm(g, 2.0);
        sum_g_sq_ += ng * ng;
        for (std::size_t i = 0; i < g.size(); ++i) pointwise[i] += g[i] * g[i];
    }
    max_pointwise_variance_ = pointwise.empty() ? 0.0 : *std::max_element(pointwise.begin(), pointwise.end());
}

Eigen::MatrixXd DiscreteNoise::q_matrix() const {
    const auto n = static_cast<Eigen::Index>(spec_.n_cells());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (const auto& g : g_) {
        const Eigen::Map<const Eigen::VectorXd> gv(g.values().data(), n);
        q.noalias() += gv * gv.transpose();
    }
    return q;
}

DiscreteNoise discretize(const NoiseModel& nm, const GridSpec& spec) {
    nm.validate();
    std::vector<GridVector> g;
    g.reserve(nm.modes.size());
    double h2 = 0.0;
    for (const auto& mode : nm.modes) {
        g.push_back(project(mode, spec));
        const double w = 2.0 * std::numbers::pi * mode.m;
        h2 += w * w * w * w * mode.amp * mode.amp / 2.0;
    }
    return DiscreteNoise(spec, std::move(g), h2);
}

void add_increment(const DiscreteNoise& dn, double dt, std::span<const double> xi, std::span<double> u) {
    const double sdt = std::sqrt(dt);
    for (std::size_t k = 0; k < dn.n_modes(); ++k) {
        const double c = sdt * xi[k];
        const auto g = dn.g_vecs()[k].values();
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += c * g[i];
    }
    recentre(u);
}

GridVector sample_increment(const DiscreteNoise& dn, double dt, const RngStream& stream) {
    if (!(dt > 0.0)) throw DomainError("sample_increment needs dt > 0");
    std::vector<double> u(dn.spec().n_cells(), 0.0);
    const auto xi = stream.normals(dn.n_modes());
    add_increment(dn, dt, xi, u);
    return GridVector(dn.spec(), std::move(u));
}

}  // namespace sfv
