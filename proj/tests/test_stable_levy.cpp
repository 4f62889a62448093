#include "khypo/stable_levy.hpp"
#include "khypo/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace khypo;

namespace {
Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
Mat eye(int d) { return Mat::Identity(d, d); }
}  // namespace

TEST_CASE("stable constant against the closed form") {
    for (double a : {0.3, 0.5, 1.0, 1.5, 1.9}) {
        const double exact = kPi / (std::tgamma(1.0 + a) * std::sin(kPi * a / 2.0));
        CHECK(stable_constant(a) == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("stable constant against brute-force oscillatory quadrature") {
    const double a = 0.7;
    // 2∫_0^∞ (1 - cos s) s^{-1-α} ds over [0, 2πK] plus the analytic tail 2∫_{2πK}^∞ s^{-1-α} ds
    // (the oscillating tail part is below 1e-7 for K = 2000)
    double sum = 0.0;
    const double L = 2.0 * kPi;
    for (int k = 0; k < 2000; ++k) {
        auto r = quad::integrate_adaptive<double>(
            [&](double s) { return s == 0.0 ? 0.0 : (1.0 - std::cos(s)) * std::pow(s, -1.0 - a); }, k * L,
            (k + 1) * L, 1e-12, 1e-15);
        sum += r.value;
    }
    const double tail = std::pow(2000.0 * L, -a) / a;
    CHECK(2.0 * (sum + tail) == doctest::Approx(stable_constant(a)).epsilon(2e-6));
}

TEST_CASE("isotropic d=1 alpha=1 symbol is 2 pi |xi|") {
    const LevySymbol s(StableMeasure::isotropic(1.0, 1, 1.0), eye(1));
    for (double x : {-3.0, -0.25, 0.5, 1.0, 7.5}) {
        Vec xi(1);
        xi << x;
        CHECK(eval_symbol(s, xi) == doctest::Approx(2.0 * kPi * std::abs(x)).epsilon(1e-8));
    }
    CHECK(eval_symbol(s, Vec::Zero(1)) == 0.0);
}

TEST_CASE("sphere moments and the fractional constant") {
    for (double a : {0.5, 1.0, 1.5}) {
        CHECK(sphere_moment(1, a) == doctest::Approx(2.0));
        const double s2 = 2.0 * std::sqrt(kPi) * std::tgamma((a + 1.0) / 2.0) / std::tgamma(a / 2.0 + 1.0);
        CHECK(sphere_moment(2, a) == doctest::Approx(s2).epsilon(1e-10));
        CHECK(sphere_moment(3, a) == doctest::Approx(4.0 * kPi / (a + 1.0)).epsilon(1e-10));
        for (int d : {1, 2, 3})
            CHECK(frac_constant(d, a) == doctest::Approx(stable_constant(a) * sphere_moment(d, a)).epsilon(1e-10));
    }
}

TEST_CASE("symbol is alpha-homogeneous on 1000 probes") {
    const double a = 1.3;
    Mat sigma(2, 2);
    sigma << 1.0, 0.3, -0.2, 0.8;
    const StableMeasure m(a, 2, {{vec2(1.0, 0.0), 0.4}, {vec2(-1.0, 0.0), 0.4}}, 0.7);
    const LevySymbol s(m, sigma);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec xi = vec2(u(rng), u(rng));
        const double t = 0.1 + 3.0 * std::abs(u(rng));
        const double lhs = eval_symbol(s, Vec(t * xi)), rhs = std::pow(t, a) * eval_symbol(s, xi);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("atoms contribute c_alpha * 2w |<sigma* xi, theta>|^alpha") {
    const double a = 0.8;
    const StableMeasure m(a, 2, {{vec2(0.6, 0.8), 0.25}, {vec2(-0.6, -0.8), 0.25}}, 0.0);
    const LevySymbol s(m, eye(2));
    const Vec xi = vec2(1.5, -0.4);
    const double proj = std::abs(xi.dot(vec2(0.6, 0.8)));
    CHECK(eval_symbol(s, xi) == doctest::Approx(stable_constant(a) * 0.5 * std::pow(proj, a)).epsilon(1e-12));
}

TEST_CASE("non-degeneracy") {
    const StableMeasure line(1.0, 2, {{vec2(1.0, 0.0), 1.0}, {vec2(-1.0, 0.0), 1.0}}, 0.0);
    CHECK_FALSE(check_nondegenerate(line).is_nondegenerate);
    const StableMeasure iso = StableMeasure::isotropic(1.0, 2, 0.1);
    const auto r = check_nondegenerate(iso);
    CHECK(r.is_nondegenerate);
    CHECK(r.kappa_low > 0.0);
    const StableMeasure cross(1.0, 2,
                              {{vec2(1.0, 0.0), 1.0}, {vec2(-1.0, 0.0), 1.0}, {vec2(0.0, 1.0), 1.0},
                               {vec2(0.0, -1.0), 1.0}},
                              0.0);
    CHECK(check_nondegenerate(cross).is_nondegenerate);
    CHECK(LevySymbol(iso, eye(2)).kappa1() > 0.0);
}

TEST_CASE("measure ordering") {
    const StableMeasure small = StableMeasure::isotropic(1.0, 2, 0.5);
    const StableMeasure big = StableMeasure::isotropic(1.0, 2, 1.0);
    const StableMeasure atoms(1.0, 2, {{vec2(1.0, 0.0), 0.3}, {vec2(-1.0, 0.0), 0.3}}, 0.5);
    CHECK(measure_leq(small, big));
    CHECK_FALSE(measure_leq(big, small));
    CHECK(measure_leq(small, atoms));
    CHECK_FALSE(measure_leq(atoms, big));
}

TEST_CASE("invalid measures are rejected") {
    CHECK_THROWS_AS(StableMeasure(2.0, 1, {}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(StableMeasure(0.0, 1, {}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(StableMeasure(1.0, 2, {{vec2(1.0, 0.0), 1.0}}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(StableMeasure(1.0, 1, {}, -1.0), InvalidArgument);
    CHECK_THROWS_AS(StableMeasure(1.0, 4, {}, 1.0), InvalidArgument);
}

TEST_CASE("sphere directions are unit vectors") {
    for (int d : {2, 3}) {
        const auto dirs = sphere_directions(d, 50);
        CHECK(dirs.size() == 50);
        for (const auto& e : dirs) CHECK(e.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
}
