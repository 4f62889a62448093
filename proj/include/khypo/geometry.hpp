#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/common.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace khypo {

struct KineticPoint {
    double t = 0.0;
    Vec x, v;
};

struct KineticBall {
    KineticPoint center;
    double r = 1.0;
};

// ρ = |t0-t1|^{1/α} + |v0-v1| + |x0-x1+Π_{t0,t1}v1|^{1/(1+α)} + |x1-x0+Π_{t1,t0}v0|^{1/(1+α)}
double quasi_metric(const CoefficientPath& path, const KineticPoint& z0, const KineticPoint& z1, double alpha);

// Open ball: |t-t0| < r^α, |x - x0 - Π_{t0,t}v0| < r^{1+α}, |v-v0| < r.
bool ball_contains(const CoefficientPath& path, const KineticBall& ball, const KineticPoint& z, double alpha);
// Metric ball {ρ(z0, z) < r}.
bool metric_ball_contains(const CoefficientPath& path, const KineticBall& ball, const KineticPoint& z,
                          double alpha);

// Uniform point of Q_r(z0).
KineticPoint sample_in_ball(const CoefficientPath& path, const KineticBall& ball, double alpha, std::uint64_t& state);

// 3^{1/α} ∨ 3 ∨ (3 + 4‖U‖_∞)^{1/(1+α)}
double engulf_constant(const CoefficientPath& path, double alpha);
// Randomized trials of Q_r(z0) ∩ Q_r(z0') ≠ ∅ ⇒ Q_r(z0) ⊂ Q_{c1 r}(z0'); returns violations.
// c1 <= 0 selects engulf_constant.
std::size_t engulf_check(const CoefficientPath& path, double alpha, std::size_t n_trials, double r_lo, double r_hi,
                         std::uint64_t seed, double c1 = 0.0, int points_per_trial = 64);

struct SandwichResult {
    std::size_t inner_violations = 0;  // points of Q̃_r outside Q_r
    std::size_t outer_violations = 0;  // points of Q_r outside Q̃_{c r}
    double worst_ratio = 0.0;          // max ρ(z0,z)/r over sampled z ∈ Q_r
};
// c <= 0 selects (4 + ‖U‖_∞)^α.
SandwichResult sandwich_check(const CoefficientPath& path, double alpha, std::size_t n_trials, double r_lo,
                              double r_hi, std::uint64_t seed, double c = 0.0);
double sandwich_constant(const CoefficientPath& path, double alpha);

// max ρ(z0,z2)/(ρ(z0,z1)+ρ(z1,z2)) over random triples.
double quasi_triangle_constant(const CoefficientPath& path, double alpha, std::size_t n_triples, std::uint64_t seed);

// Uniform cell-centred lattice on [t0,t1] × box_x × box_v; values are cell averages.
struct Lattice {
    int dim = 1;
    std::vector<double> lo, hi;  // 1 + 2d axes: t, x..., v...
    std::vector<int> n;
    std::vector<double> values;
    std::size_t size() const;
    double spacing(int axis) const { return (hi[axis] - lo[axis]) / n[axis]; }
    double center(int axis, int i) const { return lo[axis] + (i + 0.5) * spacing(axis); }
    double cell_volume() const;
    std::size_t index(const std::vector<int>& idx) const;
    KineticPoint point(const std::vector<int>& idx) const;
    static Lattice make(int dim, std::vector<double> lo, std::vector<double> hi, std::vector<int> n);
    void fill(const std::function<double(const KineticPoint&)>& f);
};

struct BallAverage {
    double mean = 0.0;
    double abs_mean = 0.0;      // mean of |f|
    double deviation = 0.0;     // mean of |f - mean|
    std::size_t cells = 0;
    bool clipped = false;
};
// Averages over lattice cells whose centres lie in Q_r(z).
BallAverage ball_average(const CoefficientPath& path, const Lattice& lat, const KineticBall& ball, double alpha);
// |Q_r| by cell counting on a lattice of `cells` cells per axis over the ball's bounding box.
double ball_volume(const CoefficientPath& path, const KineticBall& ball, double alpha, int cells);
// Fitted exponent of |Q_r| against r.
double ball_volume_exponent(const CoefficientPath& path, const KineticPoint& z, double alpha,
                            const std::vector<double>& radii, int cells);

struct OperatorValue {
    double value = 0.0;
    bool clipped = false;  // some ball left the lattice
};
// log-spaced radii from the lattice cell to the lattice extent
std::vector<double> default_radii(const Lattice& lat, double alpha, int count = 24);
OperatorValue maximal_function(const CoefficientPath& path, const Lattice& lat, const KineticPoint& z, double alpha,
                               const std::vector<double>& radii);
OperatorValue sharp_function(const CoefficientPath& path, const Lattice& lat, const KineticPoint& z, double alpha,
                             const std::vector<double>& radii);
// max of the sharp function over the unclipped sample points
double bmo_seminorm(const CoefficientPath& path, const Lattice& lat, const std::vector<KineticPoint>& points,
                    double alpha, const std::vector<double>& radii);

}  // namespace khypo
