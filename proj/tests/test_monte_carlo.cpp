#include "khypo/monte_carlo.hpp"
#include "khypo/semigroup.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace khypo;

namespace {
Mat m1(double a) { return Mat::Constant(1, 1, a); }
Vec v1(double a) { return Vec::Constant(1, a); }
StableMeasure iso(double a, double w) { return StableMeasure::isotropic(a, 1, w); }

CoefficientPath two_piece(double alpha) {
    return CoefficientPath({0.0, 0.4}, {m1(1.0), m1(1.3)}, {m1(1.0), m1(0.7)}, {iso(alpha, 1.0), iso(alpha, 0.8)});
}

// count of probes outside k standard errors
int excursions(const SampleEnsemble& e, const CoefficientPath& p, double k) {
    int bad = 0;
    for (double xi : {-1.5, -0.4, 0.3, 1.1})
        for (double eta : {-0.8, 0.0, 0.6, 1.7}) {
            if (xi == 0.0 && eta == 0.0) continue;
            const CharEstimate c = mc_char(e, v1(xi), v1(eta));
            const double exact = char_function(p, e.s, e.t, v1(xi), v1(eta));
            bad += std::abs(c.value - exact) > k * c.std_error;
        }
    return bad;
}
}  // namespace

TEST_CASE("symmetric stable sampler has the right characteristic function") {
    for (double a : {0.5, 1.0, 1.5, 2.0}) {
        const std::size_t n = 100000;
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng g = path_stream(7, i);
            s[i] = sample_symmetric_stable(a, g);
        }
        for (double u : {0.3, 1.0, 2.2}) {
            double acc = 0.0;
            for (double x : s) acc += std::cos(u * x);
            CHECK(std::abs(acc / n - std::exp(-std::pow(u, a))) <= 4.0 / std::sqrt(2.0 * n));
        }
    }
}

TEST_CASE("positive stable sampler has the right Laplace transform") {
    for (double b : {0.25, 0.5, 0.75}) {
        const std::size_t n = 100000;
        for (double sv : {0.5, 1.0, 3.0}) {
            double acc = 0.0;
            bool positive = true;
            for (std::size_t i = 0; i < n; ++i) {
                Rng g = path_stream(11, i);
                const double A = sample_positive_stable(b, g);
                positive = positive && A > 0.0;
                acc += std::exp(-sv * A);
            }
            CHECK(positive);
            CHECK(std::abs(acc / n - std::exp(-std::pow(sv, b))) <= 4.0 / std::sqrt(static_cast<double>(n)));
        }
    }
}

TEST_CASE("uniform_open never returns the endpoints") {
    Rng g = path_stream(1, 2);
    bool inside = true;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform_open(g);
        inside = inside && u > 0.0 && u < 1.0;
    }
    CHECK(inside);
}

TEST_CASE("mc_char matches the characteristic function") {
    for (double a : {0.5, 1.0, 1.5}) {
        const auto c = CoefficientPath::constant(m1(1.0), m1(1.0), iso(a, 1.0));
        const auto e = sample_K(c, 0.0, 1.0, 40000, 12, 3);
        CHECK(excursions(e, c, 4.0) == 0);
        const auto p = two_piece(a);
        const auto f = sample_K(p, 0.1, 1.0, 40000, 12, 4);
        CHECK(excursions(f, p, 4.0) == 0);
    }
}

TEST_CASE("breakpoints off the nominal mesh are honoured") {
    // 7 cells on [0,1] would put no node at 0.4; the sampler splits per segment instead
    const auto p = two_piece(1.2);
    const auto e = sample_K(p, 0.0, 1.0, 40000, 7, 5);
    CHECK(excursions(e, p, 4.0) == 0);
}

TEST_CASE("sampling is deterministic in the seed and independent of the thread count") {
    const auto p = two_piece(1.5);
    const unsigned saved = thread_count();
    set_thread_count(1);
    const auto a = sample_K(p, 0.0, 1.0, 2000, 8, 42);
    set_thread_count(3);
    const auto b = sample_K(p, 0.0, 1.0, 2000, 8, 42);
    set_thread_count(saved);
    const auto c = sample_K(p, 0.0, 1.0, 2000, 8, 43);
    REQUIRE(a.size() == b.size());
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a.X[i] == b.X[i] && a.V[i] == b.V[i];
        differs = differs || a.X[i] != c.X[i];
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("ensemble binary round trip") {
    const auto a = sample_K(two_piece(1.0), 0.0, 0.5, 50, 4, 9);
    std::stringstream ss;
    write_ensemble(a, ss);
    CHECK(ss.str().substr(0, 4) == "KHMC");
    const auto b = read_ensemble(ss);
    CHECK(b.seed == 9);
    CHECK(b.n_steps == a.n_steps);
    CHECK(b.t == 0.5);
    REQUIRE(b.size() == a.size());
    CHECK(b.V == a.V);
    CHECK(b.X == a.X);
    std::stringstream junk("nope");
    CHECK_THROWS(read_ensemble(junk));
}

TEST_CASE("moment scaling: E|V_{0,t}|^q grows like t^{q/alpha}") {
    const double a = 1.5, q = 0.7;
    const auto p = CoefficientPath::constant(m1(1.0), m1(1.0), iso(a, 1.0));
    const ScalingFit v = moment_scaling_fit(p, q, {0.05, 0.1, 0.2, 0.4, 0.8}, 40000, Component::V);
    CHECK(std::abs(v.exponent - q / a) <= 0.03);
    // X picks up one more power of t
    const ScalingFit x = moment_scaling_fit(p, q, {0.05, 0.1, 0.2, 0.4, 0.8}, 40000, Component::X);
    CHECK(std::abs(x.exponent - q * (1.0 / a + 1.0)) <= 0.03);
}

TEST_CASE("scaling law and its negative control") {
    const auto p = two_piece(1.5);
    std::vector<std::pair<Vec, Vec>> probes;
    for (double xi : {-0.6, 0.4, 1.0})
        for (double eta : {-0.5, 0.7}) probes.emplace_back(v1(xi), v1(eta));
    const auto ok = scaling_law_check(p, 1.3, 0.1, probes, 40000, 21, 24);
    CHECK(ok.max_discrepancy <= 4.0 * ok.std_error);
    const auto bad = scaling_law_check(p, 1.3, 0.1, probes, 40000, 21, 24, 0.5);
    CHECK(bad.max_discrepancy > 10.0 * bad.std_error);
}

TEST_CASE("invalid sampler arguments") {
    const auto p = two_piece(1.0);
    CHECK_THROWS_AS(sample_K(p, 1.0, 0.5, 10, 4, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_K(p, 0.0, 1.0, 10, 0, 1), InvalidArgument);
    Rng g = path_stream(0, 0);
    CHECK(sample_positive_stable(1.0, g) == 1.0);
    CHECK_THROWS_AS(sample_positive_stable(1.5, g), InvalidArgument);
    CHECK_THROWS_AS(sample_symmetric_stable(2.5, g), InvalidArgument);
}
