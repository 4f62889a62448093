#include "khypo/common.hpp"
#include "khypo/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace khypo;

namespace {
double apply(const quad::Rule& r, const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * f(r.x[i]);
    return s;
}
}  // namespace

TEST_CASE("gauss-legendre is exact for polynomials up to degree 2n-1") {
    const auto r = quad::gauss_legendre(10);
    CHECK(apply(r, [](double x) { return std::pow(x, 18); }) == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
    CHECK(apply(r, [](double x) { return std::pow(x, 19); }) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(apply(r, [](double) { return 1.0; }) == doctest::Approx(2.0).epsilon(1e-15));
    // a degree-20 monomial is no longer exact
    CHECK(std::abs(apply(r, [](double x) { return std::pow(x, 20); }) - 2.0 / 21.0) > 1e-8);
}

TEST_CASE("cached rule matches the fresh one") {
    const auto& a = quad::gauss_legendre_cached(7);
    const auto b = quad::gauss_legendre(7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.x[i] == b.x[i]);
        CHECK(a.w[i] == b.w[i]);
    }
}

TEST_CASE("gauss-jacobi moments") {
    const double a = 0.5, b = -0.3;
    const auto r = quad::gauss_jacobi(8, a, b);
    // ∫(1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
    const double m0 = std::pow(2.0, a + b + 1.0) * std::beta(a + 1.0, b + 1.0);
    CHECK(apply(r, [](double) { return 1.0; }) == doctest::Approx(m0).epsilon(1e-12));
    // first moment: m0 (b - a)/(a + b + 2)
    CHECK(apply(r, [](double x) { return x; }) == doctest::Approx(m0 * (b - a) / (a + b + 2.0)).epsilon(1e-12));
}

TEST_CASE("gauss-hermite moments") {
    const auto r = quad::gauss_hermite(20);
    const double sp = std::sqrt(kPi);
    CHECK(apply(r, [](double) { return 1.0; }) == doctest::Approx(sp).epsilon(1e-13));
    CHECK(apply(r, [](double x) { return x * x; }) == doctest::Approx(sp / 2.0).epsilon(1e-13));
    CHECK(apply(r, [](double x) { return std::pow(x, 4); }) == doctest::Approx(0.75 * sp).epsilon(1e-12));
    CHECK(apply(r, [](double x) { return std::cos(x); }) == doctest::Approx(sp * std::exp(-0.25)).epsilon(1e-13));
}

TEST_CASE("radial power rule absorbs r^p") {
    const double p = -0.5, R = 2.0;
    const auto r = quad::radial_power_rule(12, p, R);
    // ∫_0^R r^p r^3 dr
    CHECK(apply(r, [](double x) { return x * x * x; }) == doctest::Approx(std::pow(R, 3.5) / 3.5).epsilon(1e-13));
    for (double x : r.x) {
        CHECK(x > 0.0);
        CHECK(x < R);
    }
}

TEST_CASE("composite and mapped rules") {
    const auto c = quad::composite_gl(0.0, kPi, 4, 8);
    CHECK(c.size() == 32);
    CHECK(apply(c, [](double x) { return std::sin(x); }) == doctest::Approx(2.0).epsilon(1e-13));
    const auto m = quad::map_rule(quad::gauss_legendre(5), 1.0, 3.0);
    CHECK(apply(m, [](double x) { return x * x; }) == doctest::Approx(26.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("adaptive Gauss-Kronrod") {
    auto r = quad::integrate_adaptive<double>([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-11));

    auto c = quad::integrate_adaptive<cplx>([](double x) { return std::exp(cplx(0.0, x)); }, 0.0, kPi, 1e-12);
    CHECK(c.value.real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.value.imag() == doctest::Approx(2.0).epsilon(1e-12));

    auto bad = quad::integrate_adaptive<double>([](double x) { return std::pow(x, -0.95); }, 0.0, 1.0, 1e-14, 0.0, 5);
    CHECK_FALSE(bad.converged);

    auto empty = quad::integrate_adaptive<double>([](double) { return 1.0; }, 1.0, 1.0, 1e-10);
    CHECK(empty.value == 0.0);
}

TEST_CASE("pairwise summation and sphere areas") {
    std::vector<double> v(1000000, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(1e5).epsilon(1e-12));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    CHECK(sphere_area(1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi));
    CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi));
}

TEST_CASE("parallel_for writes every slot independently of the worker count") {
    const unsigned saved = thread_count();
    std::vector<double> a(1001), b(1001);
    set_thread_count(1);
    parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); });
    set_thread_count(4);
    parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); });
    set_thread_count(saved);
    CHECK(a == b);
    parallel_for(0, [&](std::size_t) { FAIL("called for an empty range"); });
}
