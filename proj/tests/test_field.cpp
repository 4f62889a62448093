#include "khypo/field.hpp"
#include "khypo/semigroup.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace khypo;

namespace {
Mat m1(double a) { return Mat::Constant(1, 1, a); }
Vec v1(double a) { return Vec::Constant(1, a); }

GaussianPacket packet(double xi0 = 2.0, double eta0 = 2.5, double bw = 0.3) {
    SourceSpec sp;
    sp.center_xi = v1(xi0);
    sp.center_eta = v1(eta0);
    sp.bandwidth = bw;
    return GaussianPacket(sp);
}

CoefficientPath unit_path() {
    return CoefficientPath::constant(m1(1.0), m1(1.0), StableMeasure::isotropic(1.0, 1, 1.0));
}
}  // namespace

TEST_CASE("snapshot of the source: Plancherel and Hermitian symmetry") {
    const auto src = packet();
    const double t = 0.5;
    const SpectralField f = source_field(src, t);
    CHECK(hermitian_defect(f) == 0.0);
    CHECK(frac_norm_l2(f, 0.0, 0.0) == doctest::Approx(src.time_profile(t) * src.spatial_l2_norm()).epsilon(1e-10));
}

TEST_CASE("closed-form L2 norm of the packet") {
    // two well-separated Gaussian lobes: ‖f‖² ≈ 2 · (2π)^{-2} · π bw² (d = 1)
    const auto src = packet(3.0, 3.0, 0.3);
    const double expect = std::sqrt(2.0 * kPi * 0.09 / std::pow(2.0 * kPi, 2));
    CHECK(src.spatial_l2_norm() == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("inverse transform reproduces point values") {
    const auto src = packet();
    const double t = 0.4;
    const SpectralField f = source_field(src, t);
    // lobes are cut at 5.5 bandwidths, which leaves ~1e-7 of the peak
    const double peak = src.value(t, v1(0.0), v1(0.0));
    for (auto [x, v] : {std::pair{0.0, 0.0}, std::pair{1.3, -0.7}, std::pair{-4.0, 2.0}, std::pair{8.0, 3.0}}) {
        const double exact = src.value(t, v1(x), v1(v));
        CHECK(std::abs(eval_point(f.slices[0], x, v) - exact) <= 1e-6 * peak);
    }
    const auto pts = inverse_transform_points(f.slices[0], {0.0, 1.3}, {0.0, -0.7});
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == eval_point(f.slices[0], 0.0, 0.0));
    CHECK(std::abs(pts[3] - src.value(t, v1(1.3), v1(-0.7))) <= 1e-6 * peak);
}

TEST_CASE("physical-grid L2 norm agrees with the spectral one") {
    const auto src = packet();
    const SpectralField f = source_field(src, 0.5);
    const PhysGrid g = auto_phys_grid(f, 6.0, 1.5);
    const PhysField u = inverse_transform_grid(f, g);
    CHECK(lp_norm(u, 2.0) == doctest::Approx(frac_norm_l2(f, 0.0, 0.0)).epsilon(1e-6));
}

TEST_CASE("lp norm of a lattice function") {
    std::vector<double> u(8, 2.0);
    CHECK(lp_norm(u, 3.0, 0.5) == doctest::Approx(std::cbrt(8.0 * 8.0 * 0.5)).epsilon(1e-15));
    u[0] = -2.0;
    CHECK(lp_norm(u, 1.5, 0.5) == doctest::Approx(std::pow(8.0 * std::pow(2.0, 1.5) * 0.5, 1.0 / 1.5)));
    const PhysGrid g = uniform_grid(0.0, 1.0, 4, -1.0, 1.0, 8);
    // endpoints are lattice points
    CHECK(g.x.front() == 0.0);
    CHECK(g.x.back() == 1.0);
    CHECK(g.cell_volume() == doctest::Approx((1.0 / 3.0) * (2.0 / 7.0)));
}

TEST_CASE("resolvent field: contraction bound and refinement") {
    const auto p = unit_path();
    const auto src = packet();
    for (double lambda : {1.0, 10.0}) {
        const SpectralField u = resolvent_field(p, src, lambda);
        const SpectralField f = source_field_like(src, u);
        CHECK(u.integrated);
        CHECK(hermitian_defect(u) <= 1e-12 * frac_norm_l2(u, 0.0, 0.0));
        // ‖u‖ ≤ ‖f‖/λ because every T_{s,t} is an L² contraction
        CHECK(frac_norm_l2(u, 0.0, 0.0) <= frac_norm_l2(f, 0.0, 0.0) / lambda * (1.0 + 1e-9));
        // space-time ‖f‖ from the closed form: ‖f(·)‖ ∫ w(t)² dt
        CHECK(frac_norm_l2(f, 0.0, 0.0) ==
              doctest::Approx(src.spatial_l2_norm() * std::sqrt(src.time_profile_norm_p(2.0))).epsilon(1e-6));
    }
    FieldGridSpec fine;
    fine.refine = 2.0;
    const double a = frac_norm_l2(resolvent_field(p, src, 1.0), 0.0, 0.5);
    const double b = frac_norm_l2(resolvent_field(p, src, 1.0, fine), 0.0, 0.5);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("snapshots agree with pointwise resolvent values") {
    const auto p = unit_path();
    const auto src = packet();
    const SpectralField u = resolvent_snapshots(p, src, 2.0, {0.3});
    const FieldSlice& sl = u.slices[0];
    for (std::size_t k = 0; k < sl.rows(); k += std::max<std::size_t>(1, sl.rows() / 5)) {
        const std::size_t j = sl.row[k];
        const cplx exact = resolvent_hat(p, src, 2.0, 0.3, v1(sl.xi[k]), v1(sl.eta[j]));
        CHECK(std::abs(sl.val[j] - exact) <= 1e-8 * std::max(std::abs(exact), 1e-10));
    }
}

TEST_CASE("map_field and combine are linear") {
    const auto src = packet();
    const SpectralField f = source_field(src, 0.5);
    const SpectralField g = map_field(f, [](double, double, double, cplx v) { return 3.0 * v; });
    CHECK(frac_norm_l2(g, 0.0, 0.0) == doctest::Approx(3.0 * frac_norm_l2(f, 0.0, 0.0)));
    const SpectralField z = combine(g, 1.0, f, -3.0);
    CHECK(frac_norm_l2(z, 0.0, 0.0) <= 1e-14 * frac_norm_l2(f, 0.0, 0.0));
}

TEST_CASE("field export has a header and one row per node") {
    const SpectralField f = source_field(packet(), 0.5);
    std::ostringstream os;
    export_field_csv(f, os);
    const std::string s = os.str();
    std::size_t lines = 0;
    for (char c : s) lines += c == '\n';
    CHECK(s.find("s,xi,eta,re,im,weight") != std::string::npos);
    CHECK(lines >= f.node_count() + 1);
}
