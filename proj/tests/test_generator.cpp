#include "khypo/generator.hpp"
#include "khypo/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace khypo;

namespace {
Mat m1(double a) { return Mat::Constant(1, 1, a); }
Vec v1(double a) { return Vec::Constant(1, a); }

// 𝓛φ(v) = -(2π)^{-1} ∫ ψ(η) φ^(η) e^{-iηv} dη for φ = e^{-v²/2} (φ^ = √(2π) e^{-η²/2}), ψ = k|η|^α
double levy_gaussian_oracle(double k, double alpha, double v) {
    auto r = quad::integrate_adaptive<double>(
        [&](double eta) { return k * std::pow(eta, alpha) * std::exp(-0.5 * eta * eta) * std::cos(eta * v); }, 0.0,
        40.0, 1e-13, 1e-15);
    return -2.0 * r.value * std::sqrt(2.0 * kPi) / (2.0 * kPi);
}

GaussianPacket packet() {
    SourceSpec sp;
    sp.center_xi = v1(2.0);
    sp.center_eta = v1(2.5);
    sp.bandwidth = 0.3;
    return GaussianPacket(sp);
}
}  // namespace

TEST_CASE("Levy operator on a Gaussian matches the Fourier multiplier") {
    const GaussianTest phi(v1(0.0), v1(0.0), 1.0, 1.0);
    for (double a : {0.5, 1.0, 1.5}) {
        const StableMeasure nu = StableMeasure::isotropic(a, 1, 1.0);
        const double k = 2.0 * stable_constant(a);  // ψ(η) = c_α · 2 · |η|^α
        for (double v : {0.0, 0.7, -1.8}) {
            const double got = apply_levy(nu, m1(1.0), phi, v1(0.0), v1(v));
            CHECK(got == doctest::Approx(levy_gaussian_oracle(k, a, v)).epsilon(1e-6));
        }
    }
    // α = 1 at v = 0 in closed form: -2√(2π)
    const double c = apply_levy(StableMeasure::isotropic(1.0, 1, 1.0), m1(1.0), phi, v1(0.0), v1(0.0));
    CHECK(c == doctest::Approx(-2.0 * std::sqrt(2.0 * kPi)).epsilon(1e-7));
}

TEST_CASE("sigma rescales the Levy operator like |sigma|^alpha") {
    const GaussianTest phi(v1(0.0), v1(0.0), 1.0, 1.0);
    const StableMeasure nu = StableMeasure::isotropic(1.3, 1, 1.0);
    const double a = apply_levy(nu, m1(1.0), phi, v1(0.0), v1(0.4));
    const double b = apply_levy(nu.scaled(std::pow(1.7, 1.3)), m1(1.0), phi, v1(0.0), v1(0.4));
    const double c = apply_levy(nu, m1(1.7), phi, v1(0.0), v1(0.4));
    CHECK(b == doctest::Approx(std::pow(1.7, 1.3) * a).epsilon(1e-9));
    CHECK(c == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("plane waves are eigenfunctions") {
    // 𝓛 cos(ηv) = -ψ(η) cos(ηv)
    const StableMeasure nu = StableMeasure::isotropic(0.8, 1, 1.0);
    const PlaneWave w(v1(0.0), v1(1.7));
    const double psi = 2.0 * stable_constant(0.8) * std::pow(1.7, 0.8);
    for (double v : {0.0, 0.3, 2.0}) {
        const double got = apply_levy(nu, m1(1.0), w, v1(0.0), v1(v));
        CHECK(got == doctest::Approx(-psi * std::cos(1.7 * v)).epsilon(1e-6).scale(psi));
    }
}

TEST_CASE("generator = Levy part + transport, adjoint flips the transport") {
    const auto p = CoefficientPath::constant(m1(1.0), m1(0.8), StableMeasure::isotropic(1.0, 1, 1.0));
    const GaussianTest phi(v1(0.2), v1(-0.1), 0.9, 1.1, 2.0);
    const Vec x = v1(0.5), v = v1(0.7);
    const double L = apply_levy(p.nu(0), p.sigma(0), phi, x, v);
    const double transport = 0.8 * v(0) * phi.grad_x(x, v)(0);
    // closed-form x-derivative of the Gaussian
    CHECK(phi.grad_x(x, v)(0) == doctest::Approx(-(0.5 - 0.2) / 0.81 * phi.value(x, v)));
    CHECK(apply_generator(p, phi, 0.3, x, v) == doctest::Approx(L + transport).epsilon(1e-12));
    CHECK(apply_adjoint_generator(p, phi, 0.3, x, v) == doctest::Approx(L - transport).epsilon(1e-12));
}

TEST_CASE("bump test function is compactly supported") {
    const BumpTest b(v1(0.0), v1(1.0), 2.0, 0.5);
    Vec xl, xh, vl, vh;
    REQUIRE(b.support(xl, xh, vl, vh));
    CHECK(vl(0) == doctest::Approx(0.5));
    CHECK(vh(0) == doctest::Approx(1.5));
    CHECK(b.value(v1(0.0), v1(1.6)) == 0.0);
    CHECK(b.value(v1(0.0), v1(1.0)) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("backward Kolmogorov residual converges at fourth order") {
    const auto p = CoefficientPath::constant(m1(1.0), m1(1.0), StableMeasure::isotropic(1.0, 1, 1.0));
    const auto src = packet();
    const std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {0.5, -0.3}, {-1.0, 0.7}};
    std::vector<double> res;
    for (double h : {0.1, 0.05, 0.025}) res.push_back(kolmogorov_residual(p, src, 0.5, 0.3, 1.0, pts, h));
    for (std::size_t i = 1; i < res.size(); ++i) CHECK(std::log2(res[i - 1] / res[i]) >= 3.5);
    CHECK(res.back() < 1e-8);
}

TEST_CASE("Kolmogorov stencil may not straddle a breakpoint") {
    const CoefficientPath p({0.0, 0.4}, {m1(1.0), m1(1.0)}, {m1(1.0), m1(0.5)},
                            {StableMeasure::isotropic(1.0, 1, 1.0), StableMeasure::isotropic(1.0, 1, 1.0)});
    CHECK_THROWS_AS(kolmogorov_residual(p, packet(), 0.5, 0.38, 1.0, {{0.0, 0.0}}, 0.05), InvalidArgument);
}

TEST_CASE("resolvent is a weak solution") {
    const auto p = CoefficientPath::constant(m1(1.0), m1(1.0), StableMeasure::isotropic(1.0, 1, 1.0));
    const auto src = packet();
    const BumpTest phi(v1(0.0), v1(0.0), 3.0, 3.0);
    WeakSpec spec;
    spec.gen.inner_nodes = 32;
    spec.gen.outer_nodes = 12;
    spec.space_panels = 16;  // the bump's flat edges need fine panels
    const WeakResidual r = weak_solution_residual(p, src, 1.0, phi, 0.0, 1.0, spec);
    MESSAGE("weak residual " << r.residual << " scale " << r.scale);
    CHECK(r.scale > 0.0);
    CHECK(r.residual <= 1e-6 * r.scale);

    CHECK_THROWS_AS(weak_solution_residual(p, src, 1.0, GaussianTest(v1(0.0), v1(0.0), 1.0, 1.0), 0.0, 1.0),
                    InvalidArgument);
}
