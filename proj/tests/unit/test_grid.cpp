#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sfv/error.hpp"
#include "sfv/grid.hpp"

using namespace sfv;

namespace {

// Independent oracle: exact cell average of amp sin(2 pi m x) over (a, b].
double sin_cell_average(double amp, int m, double a, double b) {
    const double w = 2.0 * std::numbers::pi * m;
    return amp * (std::cos(w * a) - std::cos(w * b)) / (w * (b - a));
}

GridVector random_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = nd(gen);
    return GridVector::centred(GridSpec(n), std::move(v));
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("grid spec geometry") {
    CHECK_THROWS_AS(GridSpec(1), DomainError);
    CHECK_THROWS_AS(GridSpec(0), DomainError);
    for (std::size_t n : {2u, 3u, 7u, 32u, 1000u}) {
        const GridSpec s(n);
        CHECK(std::abs(s.cell_width() * static_cast<double>(n) - 1.0) <= 1e-15);
        CHECK(s.interface(0) == 0.0);
        CHECK(s.interface(n) == 1.0);
    }
}

TEST_CASE("grid vector invariants") {
    const GridSpec s(4);
    CHECK_THROWS_AS(GridVector(s, {1.0, 0.0, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(GridVector(s, {1.0, -1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(GridVector(s, {NAN, 0.0, 0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(GridVector(s, {INFINITY, -INFINITY, 0.0, 0.0}), DomainError);
    const auto c = GridVector::centred(s, {1.0, 2.0, 3.0, 6.0});
    CHECK(c[0] == doctest::Approx(-2.0));
    CHECK(c[3] == doctest::Approx(3.0));
    CHECK(GridVector::zeros(s) == GridVector(s, {0.0, 0.0, 0.0, 0.0}));
}

TEST_CASE("project: zero function and the sqrt2 sine on four cells") {
    const GridSpec s(4);
    const auto z = project(std::function<double(double)>([](double) { return 0.0; }), s);
    for (std::size_t k = 0; k < 4; ++k) CHECK(z[k] == 0.0);

    const auto g = project(Sinusoid{std::numbers::sqrt2, 1, Phase::sin}, s);
    const double c = 2.0 * std::numbers::sqrt2 / std::numbers::pi;
    const double expect[] = {c, c, -c, -c};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(g[k] - expect[k]) <= 1e-15);
        CHECK(std::abs(g[k] - sin_cell_average(std::numbers::sqrt2, 1, k / 4.0, (k + 1) / 4.0)) <= 1e-15);
    }
    CHECK(std::abs(g[0] - 0.9003) < 5e-5);
}

TEST_CASE("project: squared norm of the sine mode at N = 32") {
    const auto g = project(Sinusoid{std::numbers::sqrt2, 1, Phase::sin}, GridSpec(32));
    const double z = std::numbers::pi / 32.0;
    const double oracle = std::pow(std::sin(z) / z, 2);
    const double n = lp_norm(g, 2.0);
    CHECK(std::abs(n * n - oracle) <= 1e-14);
    CHECK(std::abs(n * n - 0.99679) <= 5e-6);
}

TEST_CASE("project: quadrature agrees with closed form, cos phase, higher modes") {
    for (int m : {1, 3, 7}) {
        for (Phase ph : {Phase::sin, Phase::cos}) {
            const Sinusoid f{1.3, m, ph};
            const GridSpec s(96);
            const auto exact = project(f, s);
            const auto quad = project(std::function<double(double)>([&](double x) { return f(x); }), s);
            for (std::size_t k = 0; k < 96; ++k) CHECK(std::abs(exact[k] - quad[k]) <= 1e-12);
        }
    }
}

TEST_CASE("project: non-finite integrand is rejected") {
    auto f = std::function<double(double)>([](double x) { return x < 0.5 ? 1.0 / 0.0 : 0.0; });
    CHECK_THROWS_AS(project(f, GridSpec(8)), InvalidFunctionError);
}

TEST_CASE("project: output is re-centred for a function with small nonzero mean") {
    auto f = std::function<double(double)>([](double x) { return x; });
    const auto v = project(f, GridSpec(10));
    CHECK(std::abs(mean(v.values())) <= 1e-15);
}

TEST_CASE("difference operators") {
    CHECK(d2(GridVector::zeros(GridSpec(5))) == GridVector::zeros(GridSpec(5)));
    const GridVector alt(GridSpec(4), {1.0, -1.0, 1.0, -1.0});
    const auto a = d2(alt);
    for (std::size_t k = 0; k < 4; ++k) CHECK(a[k] == doctest::Approx(-64.0 * alt[k]));
    const GridVector two(GridSpec(2), {1.0, -1.0});
    const auto dp = d1_plus(two);
    CHECK(dp[0] == doctest::Approx(-4.0));
    CHECK(dp[1] == doctest::Approx(4.0));
    const auto dm = d1_minus(two);
    CHECK(dm[0] == doctest::Approx(4.0));
    CHECK(dm[1] == doctest::Approx(-4.0));

    // D2 = D- D+ = D+ D-
    std::mt19937_64 gen(5);
    const auto v = random_vector(gen, 11);
    const auto x = d2(v.values());
    const auto y = d1_minus(d1_plus(v.values()));
    const auto z = d1_plus(d1_minus(v.values()));
    for (std::size_t k = 0; k < 11; ++k) {
        CHECK(std::abs(x[k] - y[k]) <= 1e-10);
        CHECK(std::abs(x[k] - z[k]) <= 1e-10);
    }
}

TEST_CASE("summation by parts on random vectors") {
    std::mt19937_64 gen(11);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + t % 40;
        const auto v = random_vector(gen, n);
        const auto w = random_vector(gen, n);
        const auto dpv = d1_plus(v.values());
        const auto dmw = d1_minus(w.values());
        const double lhs = dot(dpv, w.values());
        const double rhs = -dot(v.values(), dmw);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (norm2(dpv) * lp_norm(w, 2.0) + lp_norm(v, 2.0) * norm2(dmw)));
        const auto dpw = d1_plus(w.values());
        const auto d2v = d2(v.values());
        const double l2 = dot(dpv, dpw);
        const double r2 = -dot(d2v, w.values());
        CHECK(std::abs(l2 - r2) <= 1e-12 * (norm2(dpv) * norm2(dpw) + norm2(d2v) * lp_norm(w, 2.0)));
    }
}

TEST_CASE("norms") {
    const GridVector z = GridVector::zeros(GridSpec(3));
    for (double p : {1.0, 2.0, 3.5, double(INFINITY)}) CHECK(lp_norm(z, p) == 0.0);
    const GridVector two(GridSpec(2), {1.0, -1.0});
    CHECK(lp_norm(two, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lp_norm(two, 0.5), DomainError);
    const GridVector v(GridSpec(4), {3.0, -1.0, -1.0, -1.0});
    CHECK(lp_norm(v, 1.0) == doctest::Approx(1.5));
    CHECK(lp_norm(v, 2.0) == doctest::Approx(std::sqrt(3.0)));
    CHECK(lp_norm(v, INFINITY) == doctest::Approx(3.0));

    std::mt19937_64 gen(3);
    for (int t = 0; t < 300; ++t) {
        const auto r = random_vector(gen, 2 + t % 30);
        CHECK(lp_norm(r, 1.0) <= lp_norm(r, 2.0) * (1 + 1e-14));
        CHECK(lp_norm(r, 2.0) <= lp_norm(r, 4.0) * (1 + 1e-14));
        CHECK(lp_norm(r, 4.0) <= lp_norm(r, INFINITY) * (1 + 1e-14));
    }
}

TEST_CASE("discrete Poincare and gradient estimate on random vectors") {
    std::mt19937_64 gen(17);
    for (int t = 0; t < 500; ++t) {
        const auto v = random_vector(gen, 2 + t % 50, 0.1 + t % 7);
        const auto dp = d1_plus(v.values());
        CHECK(lp_norm(v, 2.0) <= lp_norm(dp, 2.0) + 1e-10);
        CHECK(lp_norm(v, INFINITY) <= lp_norm(dp, 1.0) + 1e-10);
    }
}

TEST_CASE("lp Poincare on random vectors") {
    std::mt19937_64 gen(23);
    for (int t = 0; t < 300; ++t) {
        const auto v = random_vector(gen, 2 + t % 30, 0.5);
        const auto dv = d1_plus(v.values());
        for (int p : {2, 4, 6, 8}) {
            std::vector<double> vp(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) vp[k] = std::copysign(std::pow(std::abs(v[k]), p - 1), v[k]);
            const double lhs = dot(d1_plus(vp), dv);
            const double rhs = 4.0 * (p - 1) / (p * p) * std::pow(lp_norm(v, p), p);
            CHECK(lhs >= rhs - 1e-10 * std::max(1.0, lhs));
        }
    }
}

TEST_CASE("projection does not increase lp norms of smooth functions") {
    const auto f = [](double x) { return std::sin(2 * std::numbers::pi * x) + 0.5 * std::cos(6 * std::numbers::pi * x); };
    // L^p norms by fine midpoint sums
    auto lp = [&](double p) {
        const int m = 200000;
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::pow(std::abs(f((i + 0.5) / m)), p);
        return std::pow(s / m, 1.0 / p);
    };
    for (std::size_t n : {4u, 9u, 32u}) {
        const auto v = project(std::function<double(double)>(f), GridSpec(n));
        for (double p : {1.0, 2.0, 4.0}) CHECK(lp_norm(v, p) <= lp(p) + 1e-9);
    }
}

TEST_CASE("reconstruction: order checks and Pi Psi = Id") {
    const GridVector v(GridSpec(3), {1.0, -2.0, 1.0});
    CHECK_THROWS_AS(reconstruct(v, 3), DomainError);
    CHECK_THROWS_AS(reconstruct(v, -1), DomainError);
    std::mt19937_64 gen(29);
    for (int t = 0; t < 50; ++t) {
        const auto r = random_vector(gen, 2 + t % 20);
        const auto back = project(reconstruct(r, 0));
        for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::abs(back[k] - r[k]) <= 1e-14);
        const auto back2 = project(reconstruct(r, 2));
        for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::abs(back2[k] - r[k]) <= 1e-13);
    }
}

TEST_CASE("reconstruction: right-closed cells and interface values") {
    const GridVector v(GridSpec(4), {1.0, 2.0, -1.0, -2.0});
    const auto r0 = reconstruct(v, 0);
    CHECK(r0(0.25) == 1.0);   // x_1 belongs to (x_0, x_1]
    CHECK(r0(0.26) == 2.0);
    CHECK(r0(1.0) == -2.0);
    CHECK(r0(0.0) == -2.0);   // wraps to x_N
    CHECK(r0(1.1) == 1.0);
    for (int order : {1, 2}) {
        const auto r = reconstruct(v, order);
        for (std::size_t i = 1; i <= 4; ++i) CHECK(r(i / 4.0) == doctest::Approx(v[i - 1]));
    }
}

TEST_CASE("reconstruction identities on random vectors") {
    std::mt19937_64 gen(31);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + t % 40;
        const auto v = random_vector(gen, n, 0.3 + t % 5);
        const double nn = static_cast<double>(n);
        const double dp = lp_norm(d1_plus(v.values()), 2.0);
        const double d2n = lp_norm(d2(v.values()), 2.0);
        // isometry of Psi_N
        CHECK(std::abs(reconstruct(v, 0).l2_norm() - lp_norm(v, 2.0)) <= 1e-12 * lp_norm(v, 2.0));
        // |(Psi1 v)'| = |D+ v|
        const auto r1 = reconstruct(v, 1);
        CHECK(std::abs(r1.h1_seminorm() - dp) <= 1e-12 * dp);
        // |Psi1 v - Psi v|^2 = |D+ v|^2 / (3 N^2)
        const double d10 = l2_distance(r1, reconstruct(v, 0));
        CHECK(std::abs(d10 * d10 - dp * dp / (3 * nn * nn)) <= 1e-12 * dp * dp / (3 * nn * nn));
        // Psi2 bound
        const double d20 = l2_distance(reconstruct(v, 2), reconstruct(v, 0));
        CHECK(d20 * d20 <= 3.0 / (20.0 * std::pow(nn, 4)) * d2n * d2n + dp * dp / (2 * nn * nn) + 1e-14);
    }
}

TEST_CASE("l2 distance on nested meshes against a brute-force midpoint sum") {
    std::mt19937_64 gen(37);
    const auto a = random_vector(gen, 4);
    const auto b = random_vector(gen, 12);
    const auto ra = reconstruct(a, 0);
    const auto rb = reconstruct(b, 1);
    const int m = 120000;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = (i + 0.5) / m;
        s += std::pow(ra(x) - rb(x), 2);
    }
    CHECK(l2_distance(ra, rb) == doctest::Approx(std::sqrt(s / m)).epsilon(1e-6));
    CHECK(l2_distance(rb, ra) == doctest::Approx(l2_distance(ra, rb)));
    CHECK_THROWS_AS(l2_distance(reconstruct(random_vector(gen, 5), 0), ra), DomainError);
    CHECK(l2_distance(ra, ra) == 0.0);
}

TEST_CASE("csv and binary snapshot") {
    const GridVector v(GridSpec(3), {0.1, 0.2, -0.30000000000000004});
    std::ostringstream csv;
    write_csv(csv, v);
    CHECK(csv.str() == "1,0.33333333333333331,0.10000000000000001\n"
                       "2,0.66666666666666663,0.20000000000000001\n"
                       "3,1,-0.30000000000000004\n");
    std::stringstream bin;
    write_snapshot(bin, v);
    CHECK(bin.str().size() == 8 + 3 * 8);
    CHECK(static_cast<unsigned char>(bin.str()[0]) == 3);  // little-endian length
    const auto back = read_snapshot(bin);
    CHECK(back == v);
    std::stringstream truncated(bin.str().substr(0, 12));
    CHECK_THROWS(read_snapshot(truncated));
}
