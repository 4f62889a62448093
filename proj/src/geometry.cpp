#include "khypo/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace khypo {

namespace {

double next_uniform(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

// uniform in the open ball of radius R
Vec in_ball(int d, double R, std::uint64_t& s) {
    Vec y(d);
    do {
        for (int i = 0; i < d; ++i) y(i) = 2.0 * next_uniform(s) - 1.0;
    } while (y.squaredNorm() >= 1.0);
    return R * y;
}

double log_uniform(double lo, double hi, std::uint64_t& s) {
    return lo * std::exp(std::log(hi / lo) * next_uniform(s));
}

KineticPoint random_point(int d, double spread, std::uint64_t& s) {
    KineticPoint z;
    z.t = spread * (2.0 * next_uniform(s) - 1.0);
    z.x = in_ball(d, spread, s);
    z.v = in_ball(d, spread, s);
    return z;
}

}  // namespace

double quasi_metric(const CoefficientPath& path, const KineticPoint& z0, const KineticPoint& z1, double alpha) {
    const double e = 1.0 / (1.0 + alpha);
    return std::pow(std::abs(z0.t - z1.t), 1.0 / alpha) + (z0.v - z1.v).norm() +
           std::pow((z0.x - z1.x + path.flow(z0.t, z1.t) * z1.v).norm(), e) +
           std::pow((z1.x - z0.x + path.flow(z1.t, z0.t) * z0.v).norm(), e);
}

bool ball_contains(const CoefficientPath& path, const KineticBall& b, const KineticPoint& z, double alpha) {
    const auto& c = b.center;
    if (!(std::abs(z.t - c.t) < std::pow(b.r, alpha))) return false;
    if (!((z.v - c.v).norm() < b.r)) return false;
    return (z.x - c.x - path.flow(c.t, z.t) * c.v).norm() < std::pow(b.r, 1.0 + alpha);
}

bool metric_ball_contains(const CoefficientPath& path, const KineticBall& b, const KineticPoint& z, double alpha) {
    return quasi_metric(path, b.center, z, alpha) < b.r;
}

KineticPoint sample_in_ball(const CoefficientPath& path, const KineticBall& b, double alpha, std::uint64_t& s) {
    const int d = static_cast<int>(b.center.v.size());
    KineticPoint z;
    z.t = b.center.t + std::pow(b.r, alpha) * (2.0 * next_uniform(s) - 1.0);
    z.v = b.center.v + in_ball(d, b.r, s);
    z.x = b.center.x + path.flow(b.center.t, z.t) * b.center.v + in_ball(d, std::pow(b.r, 1.0 + alpha), s);
    return z;
}

double engulf_constant(const CoefficientPath& path, double alpha) {
    return std::max({std::pow(3.0, 1.0 / alpha), 3.0, std::pow(3.0 + 4.0 * path.sup_U_norm(), 1.0 / (1.0 + alpha))});
}

double sandwich_constant(const CoefficientPath& path, double alpha) {
    return std::pow(4.0 + path.sup_U_norm(), alpha);
}

std::size_t engulf_check(const CoefficientPath& path, double alpha, std::size_t n_trials, double r_lo, double r_hi,
                         std::uint64_t seed, double c1, int points_per_trial) {
    require(n_trials >= 1, "kinetic_geometry.engulf_check", "need at least one trial");
    require(r_lo > 0.0 && r_hi >= r_lo, "kinetic_geometry.engulf_check", "bad radius range");
    if (c1 <= 0.0) c1 = engulf_constant(path, alpha);
    const int d = path.dim();
    std::vector<std::size_t> viol(n_trials);
    parallel_for(n_trials, [&](std::size_t i) {
        std::uint64_t s = seed ^ (0xa0761d6478bd642fULL * (i + 1));
        const double r = log_uniform(r_lo, r_hi, s);
        KineticBall b0{random_point(d, 2.0, s), r};
        // common point, then a second centre whose ball contains it
        const KineticPoint p = sample_in_ball(path, b0, alpha, s);
        KineticPoint c1p;
        c1p.t = p.t + std::pow(r, alpha) * (2.0 * next_uniform(s) - 1.0);
        c1p.v = p.v + in_ball(d, r, s);
        c1p.x = p.x - path.flow(c1p.t, p.t) * c1p.v - in_ball(d, std::pow(r, 1.0 + alpha), s);
        const KineticBall big{c1p, c1 * r};
        std::size_t v = 0;
        for (int k = 0; k < points_per_trial; ++k)
            if (!ball_contains(path, big, sample_in_ball(path, b0, alpha, s), alpha)) ++v;
        viol[i] = v;
    });
    std::size_t total = 0;
    for (auto v : viol) total += v;
    return total;
}

SandwichResult sandwich_check(const CoefficientPath& path, double alpha, std::size_t n_trials, double r_lo,
                              double r_hi, std::uint64_t seed, double c) {
    require(n_trials >= 1 && r_lo > 0.0 && r_hi >= r_lo, "kinetic_geometry.sandwich_check", "bad trial parameters");
    if (c <= 0.0) c = sandwich_constant(path, alpha);
    const int d = path.dim();
    std::vector<std::size_t> in(n_trials), out(n_trials);
    std::vector<double> worst(n_trials);
    parallel_for(n_trials, [&](std::size_t i) {
        std::uint64_t s = seed ^ (0xe7037ed1a0b428dbULL * (i + 1));
        const double r = log_uniform(r_lo, r_hi, s);
        const KineticBall b{random_point(d, 2.0, s), r};
        // Q_r ⊂ Q̃_{c r}
        const KineticPoint z = sample_in_ball(path, b, alpha, s);
        const double rho = quasi_metric(path, b.center, z, alpha);
        worst[i] = rho / r;
        if (!(rho < c * r)) ++out[i];
        // Q̃_r ⊂ Q_r: candidates drawn from the bounding region of Q̃_r, kept if ρ < r
        KineticPoint y;
        y.t = b.center.t + std::pow(r, alpha) * (2.0 * next_uniform(s) - 1.0);
        y.v = b.center.v + in_ball(d, r, s);
        y.x = b.center.x + path.flow(b.center.t, y.t) * b.center.v + in_ball(d, 2.0 * std::pow(r, 1.0 + alpha), s);
        if (metric_ball_contains(path, b, y, alpha) && !ball_contains(path, b, y, alpha)) ++in[i];
    });
    SandwichResult res;
    for (std::size_t i = 0; i < n_trials; ++i) {
        res.inner_violations += in[i];
        res.outer_violations += out[i];
        res.worst_ratio = std::max(res.worst_ratio, worst[i]);
    }
    return res;
}

double quasi_triangle_constant(const CoefficientPath& path, double alpha, std::size_t n_triples,
                               std::uint64_t seed) {
    const int d = path.dim();
    std::vector<double> best(n_triples);
    parallel_for(n_triples, [&](std::size_t i) {
        std::uint64_t s = seed ^ (0x8ebc6af09c88c6e3ULL * (i + 1));
        // mixed scales so that every term of ρ gets to dominate
        const double sc = log_uniform(1e-2, 1e1, s);
        const KineticPoint z0 = random_point(d, sc, s), z1 = random_point(d, sc, s), z2 = random_point(d, sc, s);
        const double den = quasi_metric(path, z0, z1, alpha) + quasi_metric(path, z1, z2, alpha);
        best[i] = den > 0.0 ? quasi_metric(path, z0, z2, alpha) / den : 0.0;
    });
    return *std::max_element(best.begin(), best.end());
}

// ---- lattice ------------------------------------------------------------------------

std::size_t Lattice::size() const {
    std::size_t s = 1;
    for (int k : n) s *= static_cast<std::size_t>(k);
    return s;
}

double Lattice::cell_volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < n.size(); ++a) v *= spacing(static_cast<int>(a));
    return v;
}

std::size_t Lattice::index(const std::vector<int>& idx) const {
    std::size_t k = 0;
    for (std::size_t a = 0; a < n.size(); ++a) k = k * n[a] + idx[a];
    return k;
}

KineticPoint Lattice::point(const std::vector<int>& idx) const {
    KineticPoint z;
    z.t = center(0, idx[0]);
    z.x.resize(dim);
    z.v.resize(dim);
    for (int i = 0; i < dim; ++i) {
        z.x(i) = center(1 + i, idx[1 + i]);
        z.v(i) = center(1 + dim + i, idx[1 + dim + i]);
    }
    return z;
}

Lattice Lattice::make(int dim, std::vector<double> lo, std::vector<double> hi, std::vector<int> n) {
    const char* where = "kinetic_geometry.lattice";
    require(dim >= 1 && dim <= kMaxDim, where, "bad dimension");
    const std::size_t axes = 1 + 2 * dim;
    require(lo.size() == axes && hi.size() == axes && n.size() == axes, where, "need 1 + 2d axes");
    for (std::size_t a = 0; a < axes; ++a) require(hi[a] > lo[a] && n[a] >= 1, where, "empty axis");
    Lattice l;
    l.dim = dim;
    l.lo = std::move(lo);
    l.hi = std::move(hi);
    l.n = std::move(n);
    l.values.assign(l.size(), 0.0);
    return l;
}

void Lattice::fill(const std::function<double(const KineticPoint&)>& f) {
    const std::size_t N = size();
    const std::size_t axes = n.size();
    parallel_for(N, [&](std::size_t k) {
        std::vector<int> idx(axes);
        std::size_t m = k;
        for (std::size_t a = axes; a-- > 0;) {
            idx[a] = static_cast<int>(m % n[a]);
            m /= n[a];
        }
        values[k] = f(point(idx));
    });
}

namespace {

// Index range [a,b) of cells whose centres lie in (c - h, c + h) on one axis; flags clipping.
std::pair<int, int> axis_range(const Lattice& l, int axis, double c, double h, bool& clipped) {
    if (c - h < l.lo[axis] || c + h > l.hi[axis]) clipped = true;
    const double dx = l.spacing(axis);
    int a = static_cast<int>(std::ceil((c - h - l.lo[axis]) / dx - 0.5));
    int b = static_cast<int>(std::floor((c + h - l.lo[axis]) / dx - 0.5)) + 1;
    a = std::max(a, 0);
    b = std::min(b, l.n[axis]);
    return {a, std::max(a, b)};
}

// Calls fn(value) for every lattice cell with centre in Q_r(z).
template <class F>
bool for_cells_in_ball(const CoefficientPath& path, const Lattice& l, const KineticBall& b, double alpha, F&& fn) {
    const int d = l.dim;
    bool clipped = false;
    const double rt = std::pow(b.r, alpha), rx = std::pow(b.r, 1.0 + alpha), rv = b.r;
    const auto [t0, t1] = axis_range(l, 0, b.center.t, rt, clipped);
    std::vector<int> idx(1 + 2 * d);
    std::vector<std::pair<int, int>> vr(d);
    for (int i = 0; i < d; ++i) vr[i] = axis_range(l, 1 + d + i, b.center.v(i), rv, clipped);
    for (int it = t0; it < t1; ++it) {
        const double t = l.center(0, it);
        if (!(std::abs(t - b.center.t) < rt)) continue;
        idx[0] = it;
        const Vec xc = b.center.x + path.flow(b.center.t, t) * b.center.v;
        std::vector<std::pair<int, int>> xr(d);
        bool empty = false;
        for (int i = 0; i < d; ++i) {
            xr[i] = axis_range(l, 1 + i, xc(i), rx, clipped);
            if (xr[i].first >= xr[i].second) empty = true;
        }
        for (int i = 0; i < d; ++i)
            if (vr[i].first >= vr[i].second) empty = true;
        if (empty) continue;
        // odometer over the x and v boxes
        for (int i = 0; i < d; ++i) idx[1 + i] = xr[i].first, idx[1 + d + i] = vr[i].first;
        while (true) {
            double dx2 = 0.0, dv2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double ex = l.center(1 + i, idx[1 + i]) - xc(i);
                const double ev = l.center(1 + d + i, idx[1 + d + i]) - b.center.v(i);
                dx2 += ex * ex;
                dv2 += ev * ev;
            }
            if (dx2 < rx * rx && dv2 < rv * rv) fn(l.values[l.index(idx)]);
            int a = 2 * d;
            for (; a >= 1; --a) {
                const auto& rg = a <= d ? xr[a - 1] : vr[a - 1 - d];
                if (++idx[a] < rg.second) break;
                idx[a] = rg.first;
            }
            if (a == 0) break;
        }
    }
    return clipped;
}

}  // namespace

BallAverage ball_average(const CoefficientPath& path, const Lattice& lat, const KineticBall& b, double alpha) {
    BallAverage out;
    double s = 0.0, sa = 0.0;
    std::size_t n = 0;
    out.clipped = for_cells_in_ball(path, lat, b, alpha, [&](double v) {
        s += v;
        sa += std::abs(v);
        ++n;
    });
    out.cells = n;
    if (n == 0) return out;
    out.mean = s / n;
    out.abs_mean = sa / n;
    double dev = 0.0;
    const double m = out.mean;
    for_cells_in_ball(path, lat, b, alpha, [&](double v) { dev += std::abs(v - m); });
    out.deviation = dev / n;
    return out;
}

double ball_volume(const CoefficientPath& path, const KineticBall& b, double alpha, int cells) {
    require(cells >= 2, "kinetic_geometry.ball_volume", "need at least two cells per axis");
    const int d = static_cast<int>(b.center.x.size());
    const double rt = std::pow(b.r, alpha), rx = std::pow(b.r, 1.0 + alpha);
    // x-extent of the sheared centre over the time window (piecewise linear in t)
    std::vector<double> ts{b.center.t - rt, b.center.t + rt};
    for (double bp : path.breakpoints())
        if (bp > ts[0] && bp < ts[1]) ts.push_back(bp);
    Vec xmin = b.center.x, xmax = b.center.x;
    for (double t : ts) {
        const Vec c = b.center.x + path.flow(b.center.t, t) * b.center.v;
        xmin = xmin.cwiseMin(c);
        xmax = xmax.cwiseMax(c);
    }
    std::vector<double> lo{b.center.t - rt}, hi{b.center.t + rt};
    for (int i = 0; i < d; ++i) lo.push_back(xmin(i) - rx), hi.push_back(xmax(i) + rx);
    for (int i = 0; i < d; ++i) lo.push_back(b.center.v(i) - b.r), hi.push_back(b.center.v(i) + b.r);
    Lattice l = Lattice::make(d, lo, hi, std::vector<int>(1 + 2 * d, cells));
    std::fill(l.values.begin(), l.values.end(), 1.0);
    std::size_t n = 0;
    for_cells_in_ball(path, l, b, alpha, [&](double) { ++n; });
    return static_cast<double>(n) * l.cell_volume();
}

double ball_volume_exponent(const CoefficientPath& path, const KineticPoint& z, double alpha,
                            const std::vector<double>& radii, int cells) {
    require(radii.size() >= 2, "kinetic_geometry.ball_volume_exponent", "need two radii");
    double mx = 0, my = 0;
    std::vector<double> lx, ly;
    for (double r : radii) {
        lx.push_back(std::log(r));
        ly.push_back(std::log(ball_volume(path, KineticBall{z, r}, alpha, cells)));
        mx += lx.back() / radii.size();
        my += ly.back() / radii.size();
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    return sxy / sxx;
}

std::vector<double> default_radii(const Lattice& l, double alpha, int count) {
    const int d = l.dim;
    double rmin = std::pow(l.spacing(0), 1.0 / alpha), rmax = std::pow(0.5 * (l.hi[0] - l.lo[0]), 1.0 / alpha);
    for (int i = 0; i < d; ++i) {
        rmin = std::max({rmin, std::pow(l.spacing(1 + i), 1.0 / (1.0 + alpha)), l.spacing(1 + d + i)});
        rmax = std::min({rmax, std::pow(0.5 * (l.hi[1 + i] - l.lo[1 + i]), 1.0 / (1.0 + alpha)),
                         0.5 * (l.hi[1 + d + i] - l.lo[1 + d + i])});
    }
    std::vector<double> r(count);
    for (int k = 0; k < count; ++k)
        r[k] = count == 1 ? rmin : rmin * std::pow(rmax / rmin, static_cast<double>(k) / (count - 1));
    return r;
}

OperatorValue maximal_function(const CoefficientPath& path, const Lattice& lat, const KineticPoint& z, double alpha,
                               const std::vector<double>& radii) {
    OperatorValue out;
    for (double r : radii) {
        const auto a = ball_average(path, lat, KineticBall{z, r}, alpha);
        out.clipped = out.clipped || a.clipped;
        if (a.cells > 0) out.value = std::max(out.value, a.abs_mean);
    }
    return out;
}

OperatorValue sharp_function(const CoefficientPath& path, const Lattice& lat, const KineticPoint& z, double alpha,
                             const std::vector<double>& radii) {
    OperatorValue out;
    for (double r : radii) {
        const auto a = ball_average(path, lat, KineticBall{z, r}, alpha);
        out.clipped = out.clipped || a.clipped;
        if (a.cells > 0) out.value = std::max(out.value, a.deviation);
    }
    return out;
}

double bmo_seminorm(const CoefficientPath& path, const Lattice& lat, const std::vector<KineticPoint>& points,
                    double alpha, const std::vector<double>& radii) {
    std::vector<double> vals(points.size(), 0.0);
    parallel_for(points.size(), [&](std::size_t i) {
        const auto s = sharp_function(path, lat, points[i], alpha, radii);
        vals[i] = s.clipped ? 0.0 : s.value;
    });
    return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
}

}  // namespace khypo
