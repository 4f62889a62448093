#include "khypo/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace khypo;

namespace {
Mat m1(double a) { return Mat::Constant(1, 1, a); }
Vec v1(double a) { return Vec::Constant(1, a); }

CoefficientPath path(double alpha) {
    return CoefficientPath({0.0, 0.5}, {m1(1.0), m1(1.0)}, {m1(1.0), m1(1.5)},
                           {StableMeasure::isotropic(alpha, 1, 1.0), StableMeasure::isotropic(alpha, 1, 1.0)});
}

KineticPoint pt(double t, double x, double v) { return {t, v1(x), v1(v)}; }
}  // namespace

TEST_CASE("quasi-metric basics") {
    const auto p = path(1.0);
    const KineticPoint a = pt(0.2, 0.3, -0.4), b = pt(0.9, -1.0, 0.5);
    CHECK(quasi_metric(p, a, a, 1.0) == 0.0);
    CHECK(quasi_metric(p, a, b, 1.0) > 0.0);
    CHECK(quasi_metric(p, a, b, 1.0) == doctest::Approx(quasi_metric(p, b, a, 1.0)).epsilon(1e-14));
    // pure time separation: ρ = |Δt|^{1/α} + the two transport terms, which vanish at v = 0
    CHECK(quasi_metric(p, pt(0.0, 0.0, 0.0), pt(0.25, 0.0, 0.0), 0.5) == doctest::Approx(0.0625));
    const double K = quasi_triangle_constant(p, 1.0, 2000, 3);
    CHECK(K >= 1.0 - 1e-12);
    CHECK(std::isfinite(K));
}

TEST_CASE("kinetic ball membership follows the transported centre") {
    const auto p = path(1.0);
    const KineticBall B{pt(0.2, 0.0, 1.0), 0.5};
    CHECK(ball_contains(p, B, B.center, 1.0));
    // x follows x0 + Π_{t0,t} v0 = 0.1 at t = 0.3
    CHECK(ball_contains(p, B, pt(0.3, 0.1, 1.0), 1.0));
    CHECK_FALSE(ball_contains(p, B, pt(0.3, 0.1 + 0.26, 1.0), 1.0));
    CHECK_FALSE(ball_contains(p, B, pt(0.2, 0.0, 1.51), 1.0));
    CHECK_FALSE(ball_contains(p, B, pt(0.71, 0.5, 1.0), 1.0));
    CHECK(metric_ball_contains(p, B, B.center, 1.0));

    std::uint64_t st = 17;
    bool inside = true;
    for (int i = 0; i < 500; ++i) inside = inside && ball_contains(p, B, sample_in_ball(p, B, 1.0, st), 1.0);
    CHECK(inside);
}

TEST_CASE("engulfing with the stated constant, and failure when it is shrunk") {
    const auto p = path(1.0);
    const double c1 = engulf_constant(p, 1.0);
    // 3^{1/α} ∨ 3 ∨ (3 + 4‖U‖)^{1/(1+α)} with ‖U‖ = 1.5
    CHECK(c1 == doctest::Approx(std::max(3.0, std::sqrt(9.0))));
    CHECK(engulf_check(p, 1.0, 300, 0.1, 1.0, 5) == 0);
    CHECK(engulf_check(p, 1.0, 300, 0.1, 1.0, 5, 1.01) > 0);
}

TEST_CASE("metric balls sandwich the kinetic balls") {
    const auto p = path(1.0);
    const SandwichResult r = sandwich_check(p, 1.0, 300, 0.1, 1.0, 7);
    CHECK(r.inner_violations == 0);
    CHECK(r.outer_violations == 0);
    CHECK(sandwich_constant(p, 1.0) == doctest::Approx(5.5));
    // for α < 1 the constant (4 + ‖U‖)^α is too small; 4 + ‖U‖ suffices
    const auto q = path(0.5);
    CHECK(sandwich_check(q, 0.5, 300, 0.1, 1.0, 7).outer_violations > 0);
    const SandwichResult s = sandwich_check(q, 0.5, 300, 0.1, 1.0, 7, 5.5);
    CHECK(s.outer_violations == 0);
    CHECK(s.inner_violations == 0);
}

TEST_CASE("ball volume scales like r^{2+2 alpha} in d = 1") {
    const auto p = path(1.0);
    for (double a : {0.5, 1.0, 1.5}) {
        const KineticBall B{pt(0.1, 0.0, 0.3), 0.7};
        CHECK(ball_volume(p, B, a, 40) == doctest::Approx(8.0 * std::pow(0.7, 2.0 + 2.0 * a)).epsilon(0.02));
        CHECK(ball_volume_exponent(p, B.center, a, {0.3, 0.5, 0.8, 1.2}, 32) ==
              doctest::Approx(2.0 + 2.0 * a).epsilon(0.01));
    }
}

TEST_CASE("lattice indexing") {
    const Lattice L = Lattice::make(1, {0.0, -1.0, -2.0}, {1.0, 1.0, 2.0}, {4, 8, 16});
    CHECK(L.size() == 4 * 8 * 16);
    CHECK(L.cell_volume() == doctest::Approx(0.25 * 0.25 * 0.25));
    const KineticPoint z = L.point({1, 2, 3});
    CHECK(z.t == doctest::Approx(0.375));
    CHECK(z.x(0) == doctest::Approx(-0.375));
    CHECK(z.v(0) == doctest::Approx(-1.125));
    CHECK(L.index({3, 7, 15}) == L.size() - 1);
}

TEST_CASE("maximal and sharp functions") {
    const auto p = path(1.0);
    Lattice L = Lattice::make(1, {0.0, -3.0, -3.0}, {1.0, 3.0, 3.0}, {10, 24, 24});
    const KineticPoint z = pt(0.5, 0.0, 0.0);
    L.fill([](const KineticPoint&) { return 2.0; });
    const auto radii = default_radii(L, 1.0, 8);
    REQUIRE(!radii.empty());
    CHECK(maximal_function(p, L, z, 1.0, radii).value == doctest::Approx(2.0));
    CHECK(sharp_function(p, L, z, 1.0, radii).value == doctest::Approx(0.0).epsilon(1e-14));

    L.fill([](const KineticPoint& q) { return std::sin(q.x(0)) + q.v(0) * q.v(0) - q.t; });
    const OperatorValue M = maximal_function(p, L, z, 1.0, radii);
    const OperatorValue S = sharp_function(p, L, z, 1.0, radii);
    CHECK(S.value > 0.0);
    CHECK(S.value <= 2.0 * M.value);
    const BallAverage avg = ball_average(p, L, {z, 0.5}, 1.0);
    CHECK(avg.cells > 0);
    CHECK(avg.deviation <= 2.0 * avg.abs_mean);
    CHECK(bmo_seminorm(p, L, {z, pt(0.4, 0.2, -0.1)}, 1.0, radii) >= S.value);
}
