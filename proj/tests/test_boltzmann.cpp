#include "khypo/boltzmann.hpp"
#include "khypo/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace khypo;

namespace {
Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

CollisionKernelSpec kernel(double gamma = 0.2, double alpha = 0.5) {
    CollisionKernelSpec k;
    k.gamma = gamma;
    k.alpha = alpha;
    k.dim = 2;
    return k;
}

GaussPoly gauss(const Vec& c, double width, double quad = 0.0, double amp = 1.0) {
    GaussPoly g;
    g.center = c;
    g.width = width;
    g.quad = quad;
    g.amp = amp;
    return g;
}
}  // namespace

TEST_CASE("collision operator against an independent tensor-quadrature value") {
    // reference from a separate 400 × 256 Gauss/midpoint tensor rule with adaptive outer radius
    const GaussPoly f = gauss(v2(0.0, 0.0), 1.0);
    const GaussPoly g = gauss(v2(0.3, 0.0), 0.8, 0.2);
    const double ref = -4.627192634166605;
    const double c = collision_Q_carleman(f, g, kernel(), v2(0.0, 0.0));
    const double s = collision_Q_spherical(f, g, kernel(), v2(0.0, 0.0));
    CHECK(c == doctest::Approx(ref).epsilon(1e-5));
    CHECK(s == doctest::Approx(ref).epsilon(1e-5));
}

TEST_CASE("Maxwellian pair is an equilibrium") {
    const GaussPoly M = gauss(v2(0.2, -0.1), 1.0);
    for (const Vec& v : {v2(0.0, 0.0), v2(1.0, 0.5)}) {
        const CollisionSplit sp = collision_split(M, M, kernel(), v);
        CHECK(std::abs(sp.Q) <= 1e-10 * std::abs(sp.Q1));
        CHECK(std::abs(collision_Q_spherical(M, M, kernel(), v)) <= 1e-10 * std::abs(sp.Q1));
    }
}

TEST_CASE("Carleman and spherical forms agree; split sums to Q") {
    const GaussPoly f = gauss(v2(0.0, 0.0), 1.0);
    const GaussPoly g = gauss(v2(0.5, -0.3), 0.8, 0.3);
    const Vec v = v2(0.3, -0.2);
    const double c = collision_Q_carleman(f, g, kernel(), v);
    const double s = collision_Q_spherical(f, g, kernel(), v);
    CHECK(c == doctest::Approx(s).epsilon(1e-8));
    const CollisionSplit sp = collision_split(f, g, kernel(), v);
    CHECK(sp.Q1 + sp.Q2 == doctest::Approx(sp.Q).epsilon(1e-12));
    CHECK(sp.Q == doctest::Approx(c).epsilon(1e-8));
    CHECK(sp.Q1 == doctest::Approx(g(v) * sp.Hf).epsilon(1e-12));
    CHECK(sp.truncation > 0.0);
}

TEST_CASE("bilinearity and trivial cases") {
    const GaussPoly f = gauss(v2(0.0, 0.0), 1.0);
    const GaussPoly g = gauss(v2(0.5, -0.3), 0.8, 0.3);
    const Vec v = v2(0.1, 0.4);
    const double q = collision_Q_carleman(f, g, kernel(), v);
    CHECK(collision_Q_carleman(f.scaled(2.5), g, kernel(), v) == doctest::Approx(2.5 * q).epsilon(1e-12));
    CHECK(collision_Q_carleman(f, g.scaled(-0.4), kernel(), v) == doctest::Approx(-0.4 * q).epsilon(1e-12));

    // constant g: the differences g(v') - g(v) vanish, so Q = Q1 = g H_f
    const CollisionSplit flat = collision_split(f, GaussPoly::constant(2, 3.0), kernel(), v);
    CHECK(flat.Q2 == 0.0);
    CHECK(flat.Q == doctest::Approx(3.0 * flat.Hf).epsilon(1e-12));

    CollisionKernelSpec zero = kernel();
    zero.scale = 0.0;
    CHECK(collision_Q_carleman(f, g, zero, v) == 0.0);
    CHECK(collision_Q_carleman(f.scaled(0.0), g, kernel(), v) == 0.0);
}

TEST_CASE("kernel parameters are validated") {
    const GaussPoly f = gauss(v2(0.0, 0.0), 1.0);
    CHECK_THROWS_AS(collision_Q_carleman(f, f, kernel(0.8, 0.5), v2(0.0, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(collision_Q_carleman(f, f, kernel(-1.6, 0.5), v2(0.0, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(collision_Q_carleman(f, f, kernel(0.0, 2.0), v2(0.0, 0.0)), InvalidArgument);
    CollisionKernelSpec k = kernel();
    k.dim = 4;
    CHECK_THROWS_AS(k.validate(), InvalidArgument);
}

TEST_CASE("K_f is even in w and radial for a centred Gaussian") {
    const GaussPoly f = gauss(v2(0.0, 0.0), 1.0);
    const CollisionKernelSpec k = kernel();
    const double p = k.gamma + 1.0 + k.alpha;
    const double rho = 0.7;
    // d = 2: K_f(0, w) = 2 ∫ e^{-t²/2} (t² + |w|²)^{p/2} dt
    auto r = quad::integrate_adaptive<double>(
        [&](double t) { return 2.0 * 2.0 * std::exp(-0.5 * t * t) * std::pow(t * t + rho * rho, p / 2.0); }, 0.0,
        40.0, 1e-13, 1e-15);
    const double a = kernel_Kf(f, k, v2(0.0, 0.0), v2(rho, 0.0));
    CHECK(a == doctest::Approx(r.value).epsilon(1e-8));
    CHECK(kernel_Kf(f, k, v2(0.0, 0.0), v2(-rho, 0.0)) == doctest::Approx(a).epsilon(1e-12));
    const double c = rho / std::sqrt(2.0);
    CHECK(kernel_Kf(f, k, v2(0.0, 0.0), v2(c, c)) == doctest::Approx(a).epsilon(1e-8));
}

TEST_CASE("co-area identity") {
    // d = 2, F = e^{-|x|²}: ∫ dx · |S¹| = π · 2π
    const PhaseFn F = [](const Vec& x, const Vec&) { return std::exp(-x.squaredNorm()); };
    const CoareaResult r = coarea_identity_check(F, 2);
    CHECK(r.lhs == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-8));
    CHECK(r.rel_error <= 1e-8);

    // a direction-dependent phase in d = 3, symmetric form
    const PhaseFn G = [](const Vec& x, const Vec& w) {
        return std::exp(-x.squaredNorm()) * (1.0 + 0.5 * w(2) * w(2) + 0.3 * x(0) * w(1));
    };
    const CoareaResult s = coarea_identity_check(G, 3, true);
    CHECK(s.rel_error <= 1e-6);

    const CoareaResult z = coarea_identity_check([](const Vec&, const Vec&) { return 0.0; }, 2);
    CHECK(z.lhs == 0.0);
    CHECK(z.rel_error == 0.0);
}

TEST_CASE("orthogonal frame is orthonormal and orthogonal to w") {
    for (const Vec& w : {v2(0.3, 1.0), v2(1.0, 0.0)}) {
        const auto fr = orthogonal_frame(w);
        REQUIRE(fr.size() == 1);
        CHECK(std::abs(fr[0].dot(w)) <= 1e-15);
        CHECK(fr[0].norm() == doctest::Approx(1.0).epsilon(1e-15));
    }
    Vec w3(3);
    w3 << 0.0, 0.0, 2.0;  // along e_d: falls back to e_1
    const auto fr = orthogonal_frame(w3);
    REQUIRE(fr.size() == 2);
    CHECK(std::abs(fr[0].dot(fr[1])) <= 1e-15);
    CHECK(std::abs(fr[0].dot(w3)) <= 1e-15);
    CHECK(std::abs(fr[1].dot(w3)) <= 1e-15);
}
