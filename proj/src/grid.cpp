#include "sfv/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "sfv/error.hpp"

namespace sfv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 5-point Gauss-Legendre nodes/weights on [0, 1].
constexpr std::array<double, 5> kGl5Nodes = {
    0.04691007703066800, 0.23076534494715845, 0.5, 0.76923465505284155, 0.95308992296933200};
constexpr std::array<double, 5> kGl5Weights = {
    0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
    0.11846344252809454};

// 3-point Gauss-Legendre on [0, 1]: exact for quartics.
constexpr std::array<double, 3> kGl3Nodes = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr std::array<double, 3> kGl3Weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

void check_same_size(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DomainError("vector sizes differ: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
}

}  // namespace

GridSpec::GridSpec(std::size_t n_cells) : n_(n_cells) {
    if (n_cells < 2) {
        throw DomainError("a grid needs at least 2 cells, got " + std::to_string(n_cells));
    }
}

GridVector::GridVector(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.n_cells()) {
        throw DomainError("GridVector expects " + std::to_string(spec_.n_cells()) +
                          " values, got " + std::to_string(values_.size()));
    }
    double scale = 1.0;
    for (double x : values_) {
        if (!std::isfinite(x)) throw DomainError("GridVector entries must be finite");
        scale = std::max(scale, std::abs(x));
    }
    const double m = mean(values_);
    if (std::abs(m) > kMeanTolerance * scale) {
        throw DomainError("GridVector must have zero mean, got mean " + std::to_string(m));
    }
}

GridVector GridVector::zeros(GridSpec spec) {
    return GridVector(spec, std::vector<double>(spec.n_cells(), 0.0));
}

GridVector GridVector::centred(GridSpec spec, std::vector<double> values) {
    const double m = mean(values);
    for (double& x : values) x -= m;
    return GridVector(spec, std::move(values));
}

GridVector& GridVector::operator+=(const GridVector& other) {
    check_same_size(values_, other.values_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

GridVector& GridVector::operator-=(const GridVector& other) {
    check_same_size(values_, other.values_);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

GridVector& GridVector::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

void recentre(std::span<double> v) {
    const double m = mean(v);
    if (std::abs(m) > kRecentreThreshold) {
        for (double& x : v) x -= m;
    }
}

void apply_d1_plus(std::span<const double> v, std::span<double> out) {
    check_same_size(v, out);
    const std::size_t n = v.size();
    const double scale = static_cast<double>(n);
    for (std::size_t k = 0; k + 1 < n; ++k) out[k] = scale * (v[k + 1] - v[k]);
    out[n - 1] = scale * (v[0] - v[n - 1]);
}

void apply_d1_minus(std::span<const double> v, std::span<double> out) {
    check_same_size(v, out);
    const std::size_t n = v.size();
    const double scale = static_cast<double>(n);
    out[0] = scale * (v[0] - v[n - 1]);
    for (std::size_t k = 1; k < n; ++k) out[k] = scale * (v[k] - v[k - 1]);
}

void apply_d2(std::span<const double> v, std::span<double> out) {
    check_same_size(v, out);
    const std::size_t n = v.size();
    const double scale = static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double left = v[(k + n - 1) % n];
        const double right = v[(k + 1) % n];
        out[k] = scale * (right - 2.0 * v[k] + left);
    }
}

std::vector<double> d1_plus(std::span<const double> v) {
    std::vector<double> out(v.size());
    apply_d1_plus(v, out);
    return out;
}

std::vector<double> d1_minus(std::span<const double> v) {
    std::vector<double> out(v.size());
    apply_d1_minus(v, out);
    return out;
}

std::vector<double> d2(std::span<const double> v) {
    std::vector<double> out(v.size());
    apply_d2(v, out);
    return out;
}

GridVector d1_plus(const GridVector& v) { return GridVector::centred(v.spec(), d1_plus(v.values())); }
GridVector d1_minus(const GridVector& v) { return GridVector::centred(v.spec(), d1_minus(v.values())); }
GridVector d2(const GridVector& v) { return GridVector::centred(v.spec(), d2(v.values())); }

double dot(std::span<const double> a, std::span<const double> b) {
    check_same_size(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s / static_cast<double>(a.size());
}

double lp_norm(std::span<const double> v, double p) {
    if (!(p >= 1.0)) throw DomainError("lp_norm requires p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    if (p == 1.0) {
        for (double x : v) s += std::abs(x);
        return s / n;
    }
    if (p == 2.0) {
        for (double x : v) s += x * x;
        return std::sqrt(s / n);
    }
    for (double x : v) s += std::pow(std::abs(x), p);
    return std::pow(s / n, 1.0 / p);
}

double lp_norm(const GridVector& v, double p) { return lp_norm(v.values(), p); }

double Sinusoid::operator()(double x) const noexcept {
    const double arg = kTwoPi * m * x;
    return amp * (phase == Phase::sin ? std::sin(arg) : std::cos(arg));
}

double Sinusoid::integral(double a, double b) const noexcept {
    const double w = kTwoPi * m;
    const double mid = 0.5 * w * (a + b);
    const double half = 0.5 * w * (b - a);
    // cos(wa) - cos(wb) = 2 sin(mid) sin(half); sin(wb) - sin(wa) = 2 cos(mid) sin(half)
    const double s = 2.0 * std::sin(half) / w;
    return amp * (phase == Phase::sin ? std::sin(mid) : std::cos(mid)) * s;
}

double Sinusoid::integral_sq(double a, double b) const noexcept {
    const double w = kTwoPi * m;
    // sin(2wb) - sin(2wa) = 2 cos(w(a+b)) sin(w(b-a))
    const double osc = 2.0 * std::cos(w * (a + b)) * std::sin(w * (b - a)) / (4.0 * w);
    const double base = 0.5 * (b - a);
    return amp * amp * (phase == Phase::sin ? base - osc : base + osc);
}

GridVector project(const Sinusoid& f, const GridSpec& spec) {
    const std::size_t n = spec.n_cells();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = static_cast<double>(n) * f.integral(spec.interface(k), spec.interface(k + 1));
    }
    return GridVector::centred(spec, std::move(out));
}

GridVector project(const std::function<double(double)>& f, const GridSpec& spec) {
    const std::size_t n = spec.n_cells();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = spec.interface(k);
        double s = 0.0;
        for (std::size_t q = 0; q < kGl5Nodes.size(); ++q) {
            s += kGl5Weights[q] * f(a + kGl5Nodes[q] * spec.cell_width());
        }
        if (!std::isfinite(s)) {
            throw InvalidFunctionError("non-finite integral on cell " + std::to_string(k + 1));
        }
        out[k] = s;  // N * (h * sum w f) = sum w f
    }
    return GridVector::centred(spec, std::move(out));
}

Reconstruction::Reconstruction(GridSpec spec, int order, std::vector<std::array<double, 3>> coeffs)
    : spec_(spec), order_(order), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != spec_.n_cells()) {
        throw DomainError("reconstruction needs one coefficient triple per cell");
    }
}

double Reconstruction::local(std::size_t k, double s) const noexcept {
    const auto& c = coeffs_[k];
    return c[0] + s * (c[1] + s * c[2]);
}

double Reconstruction::operator()(double x) const noexcept {
    double y = x - std::floor(x);
    if (y == 0.0) y = 1.0;
    const double scaled = y * static_cast<double>(spec_.n_cells());
    auto k = static_cast<std::ptrdiff_t>(std::ceil(scaled)) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(spec_.n_cells()) - 1);
    return local(static_cast<std::size_t>(k), scaled - static_cast<double>(k));
}

double Reconstruction::cell_integral(std::size_t k) const noexcept {
    const auto& c = coeffs_[k];
    return spec_.cell_width() * (c[0] + c[1] / 2.0 + c[2] / 3.0);
}

double Reconstruction::l2_norm() const noexcept {
    double s = 0.0;
    for (const auto& c : coeffs_) {
        s += c[0] * c[0] + c[1] * c[1] / 3.0 + c[2] * c[2] / 5.0 + c[0] * c[1] +
             2.0 * c[0] * c[2] / 3.0 + c[1] * c[2] / 2.0;
    }
    return std::sqrt(s * spec_.cell_width());
}

double Reconstruction::h1_seminorm() const noexcept {
    // p'(x) = N (c1 + 2 c2 s), integrated over a cell of width 1/N.
    double s = 0.0;
    for (const auto& c : coeffs_) {
        s += c[1] * c[1] + 2.0 * c[1] * c[2] + 4.0 * c[2] * c[2] / 3.0;
    }
    return std::sqrt(s * static_cast<double>(spec_.n_cells()));
}

Reconstruction reconstruct(const GridVector& v, int order) {
    if (order < 0 || order > 2) {
        throw DomainError("reconstruction order must be 0, 1 or 2, got " + std::to_string(order));
    }
    const std::size_t n = v.size();
    std::vector<std::array<double, 3>> coeffs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double right = v[k];               // value at x_{k+1}, also the cell average
        const double left = v[(k + n - 1) % n];  // value at x_k
        switch (order) {
        case 0: coeffs[k] = {right, 0.0, 0.0}; break;
        case 1: coeffs[k] = {left, right - left, 0.0}; break;
        default: {
            const double a = left - right;
            coeffs[k] = {left, -4.0 * a, 3.0 * a};
        }
        }
    }
    return Reconstruction(v.spec(), order, std::move(coeffs));
}

GridVector project(const Reconstruction& f) {
    const std::size_t n = f.spec().n_cells();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = static_cast<double>(n) * f.cell_integral(k);
    return GridVector::centred(f.spec(), std::move(out));
}

double l2_distance(const Reconstruction& a, const Reconstruction& b) {
    const std::size_t na = a.spec().n_cells();
    const std::size_t nb = b.spec().n_cells();
    const Reconstruction& coarse = na <= nb ? a : b;
    const Reconstruction& fine = na <= nb ? b : a;
    const std::size_t nc = coarse.spec().n_cells();
    const std::size_t nf = fine.spec().n_cells();
    if (nf % nc != 0) {
        throw DomainError("l2_distance needs nested meshes, got N=" + std::to_string(na) +
                          " and N=" + std::to_string(nb));
    }
    const std::size_t ratio = nf / nc;
    double s = 0.0;
    for (std::size_t k = 0; k < nf; ++k) {
        const std::size_t kc = k / ratio;
        const double offset = static_cast<double>(k % ratio);
        double cell = 0.0;
        for (std::size_t q = 0; q < kGl3Nodes.size(); ++q) {
            const double sf = kGl3Nodes[q];
            const double sc = (offset + sf) / static_cast<double>(ratio);
            const double d = fine.local(k, sf) - coarse.local(kc, sc);
            cell += kGl3Weights[q] * d * d;
        }
        s += cell;
    }
    return std::sqrt(s / static_cast<double>(nf));
}

void write_csv(std::ostream& os, const GridVector& v) {
    char buf[96];
    for (std::size_t k = 0; k < v.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k + 1, v.spec().interface(k + 1), v[k]);
        os << buf;
    }
}

void write_u64(std::ostream& os, std::uint64_t x) {
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((x >> (8 * b)) & 0xffu);
    os.write(bytes, 8);
}

void write_f64(std::ostream& os, double x) { write_u64(os, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t read_u64(std::istream& is) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
        throw DomainError("truncated binary stream");
    }
    std::uint64_t x = 0;
    for (int b = 0; b < 8; ++b) x |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    return x;
}

double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

void write_snapshot(std::ostream& os, const GridVector& v) {
    write_u64(os, v.size());
    for (double x : v.values()) write_f64(os, x);
}

GridVector read_snapshot(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    if (n < 2 || n > (std::uint64_t{1} << 32)) throw DomainError("invalid snapshot size");
    std::vector<double> values(n);
    for (auto& x : values) x = read_f64(is);
    return GridVector(GridSpec(n), std::move(values));
}

}  // namespace sfv
