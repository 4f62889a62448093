#include "khypo/monte_carlo.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace khypo {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double standard_normal(Rng& rng) {
    // Box–Muller, one of the pair; portable across standard libraries.
    const double u1 = uniform_open(rng), u2 = uniform_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

Rng path_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t st = seed;
    const std::uint64_t a = splitmix64(st);
    st ^= index * 0xd1b54a32d192ed03ULL;
    const std::uint64_t b = splitmix64(st);
    return Rng(a ^ (b << 1));
}

double uniform_open(Rng& rng) {
    // 53 random bits, shifted off 0
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_symmetric_stable(double alpha, Rng& rng) {
    require(alpha > 0.0 && alpha <= 2.0, "monte_carlo.sample_symmetric_stable", "alpha must lie in (0,2]");
    const double U = kPi * (uniform_open(rng) - 0.5);
    const double W = -std::log(uniform_open(rng));
    if (alpha == 1.0) return std::tan(U);
    return std::sin(alpha * U) / std::pow(std::cos(U), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * U) / W, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double beta, Rng& rng) {
    require(beta > 0.0 && beta <= 1.0, "monte_carlo.sample_positive_stable", "beta must lie in (0,1]");
    if (beta == 1.0) return 1.0;
    const double U = kPi * uniform_open(rng);
    const double W = -std::log(uniform_open(rng));
    return std::sin(beta * U) / std::pow(std::sin(U), 1.0 / beta) *
           std::pow(std::sin((1.0 - beta) * U) / W, (1.0 - beta) / beta);
}

Vec sample_kernel_increment(const SymbolKernel& k, int dim, double dt, Rng& rng) {
    const double a = k.alpha;
    Vec y = Vec::Zero(dim);
    if (dim == 1) {
        if (k.scalar_coeff > 0.0) y(0) = std::pow(k.scalar_coeff * dt, 1.0 / a) * sample_symmetric_stable(a, rng);
        return y;
    }
    for (const auto& p : k.pairs) {
        if (p.weight <= 0.0) continue;
        y += p.dir * (std::pow(p.weight * dt, 1.0 / a) * sample_symmetric_stable(a, rng));
    }
    if (k.iso_coeff > 0.0) {
        // sub-Gaussian: √A·G has exponent (|ζ|²/2)^{α/2}
        const double A = sample_positive_stable(0.5 * a, rng);
        Vec g(dim);
        for (int i = 0; i < dim; ++i) g(i) = standard_normal(rng);
        const double c = std::pow(k.iso_coeff * dt * std::pow(2.0, 0.5 * a), 1.0 / a);
        y += k.sigma_t.transpose() * (c * std::sqrt(A) * g);
    }
    return y;
}

Vec sample_stable_increment(const StableMeasure& m, double dt, Rng& rng) {
    require(dt > 0.0, "monte_carlo.sample_stable_increment", "dt must be positive");
    const Mat I = Mat::Identity(m.dim(), m.dim());
    const CoefficientPath p = CoefficientPath::constant(I, Mat::Zero(m.dim(), m.dim()), m);
    return sample_kernel_increment(p.kernel(0), m.dim(), dt, rng);
}

SampleEnsemble sample_K(const CoefficientPath& path, double s, double t, std::size_t n_paths, int n_steps,
                        std::uint64_t seed) {
    const char* where = "monte_carlo.sample_K";
    require(n_steps >= 1, where, "n_steps must be >= 1");
    require(n_paths >= 1, where, "need at least one path");
    require(s <= t, where, "requires s <= t");
    const int d = path.dim();
    SampleEnsemble e;
    e.dim = d;
    e.s = s;
    e.t = t;
    e.n_steps = n_steps;
    e.seed = seed;
    e.X.assign(n_paths, Vec::Zero(d));
    e.V.assign(n_paths, Vec::Zero(d));
    if (s == t) return e;

    // cells: each coefficient segment gets its share of n_steps (at least one), so breakpoints are mesh points
    struct Node {
        std::size_t piece;
        double half;  // half-cell length
        Mat pi;       // Π_{r,t}
    };
    std::vector<Node> nodes;
    const double g = 0.5 / std::sqrt(3.0);
    path.for_each_segment(s, t, [&](double a0, double b0, std::size_t k) {
        const int m = std::max(1, static_cast<int>(std::ceil(n_steps * (b0 - a0) / (t - s) - 1e-9)));
        const double h = (b0 - a0) / m;
        for (int i = 0; i < m; ++i) {
            const double a = a0 + i * h;
            for (double r : {a + (0.5 - g) * h, a + (0.5 + g) * h}) nodes.push_back({k, 0.5 * h, path.flow(r, t)});
        }
    });
    if (d == 1) {
        // scalar fast path: increment = scale · S
        std::vector<double> scale(nodes.size()), pi(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            scale[i] = std::pow(path.kernel(nodes[i].piece).scalar_coeff * nodes[i].half, 1.0 / path.alpha());
            pi[i] = nodes[i].pi(0, 0);
        }
        const double a = path.alpha();
        parallel_for(n_paths, [&](std::size_t p) {
            Rng rng = path_stream(seed, p);
            double X = 0.0, V = 0.0;
            for (std::size_t i = 0; i < scale.size(); ++i) {
                const double y = scale[i] * sample_symmetric_stable(a, rng);
                V += y;
                X += pi[i] * y;
            }
            e.X[p](0) = X;
            e.V[p](0) = V;
        });
        return e;
    }
    parallel_for(n_paths, [&](std::size_t p) {
        Rng rng = path_stream(seed, p);
        Vec X = Vec::Zero(d), V = Vec::Zero(d);
        for (const auto& n : nodes) {
            const Vec y = sample_kernel_increment(path.kernel(n.piece), d, n.half, rng);
            V += y;
            X += n.pi * y;
        }
        e.X[p] = X;
        e.V[p] = V;
    });
    return e;
}

CharEstimate mc_char(const SampleEnsemble& e, const Vec& xi, const Vec& eta) {
    require(e.size() > 0, "monte_carlo.mc_char", "empty ensemble");
    std::vector<double> c(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) c[i] = std::cos(xi.dot(e.X[i]) + eta.dot(e.V[i]));
    CharEstimate out;
    out.value = pairwise_sum(c) / static_cast<double>(e.size());
    out.std_error = 1.0 / std::sqrt(2.0 * static_cast<double>(e.size()));
    return out;
}

ScalingFit moment_scaling_fit(const CoefficientPath& path, double q, const std::vector<double>& horizons,
                              std::size_t n_paths, Component comp, int n_steps, std::uint64_t seed) {
    const char* where = "monte_carlo.moment_scaling_fit";
    if (!(q > 0.0) || q >= path.alpha()) fail_invalid(where, "q must lie in (0, alpha)");
    require(horizons.size() >= 2, where, "need at least two horizons");
    std::vector<double> lx, ly, var;
    for (std::size_t j = 0; j < horizons.size(); ++j) {
        require(horizons[j] > 0.0, where, "horizons must be positive");
        const auto e = sample_K(path, 0.0, horizons[j], n_paths, n_steps, seed + 0x1000 * (j + 1));
        std::vector<double> m(e.size()), m2(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double r = comp == Component::V ? e.V[i].norm() : e.X[i].norm();
            m[i] = std::pow(r, q);
            m2[i] = m[i] * m[i];
        }
        const double n = static_cast<double>(e.size());
        const double mean = pairwise_sum(m) / n;
        const double sd2 = std::max(0.0, pairwise_sum(m2) / n - mean * mean);
        lx.push_back(std::log(horizons[j]));
        ly.push_back(std::log(mean));
        var.push_back(sd2 / (n * mean * mean));  // delta method for log(mean)
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t j = 0; j < lx.size(); ++j) mx += lx[j] / n, my += ly[j] / n;
    double sxx = 0, sxy = 0, vs = 0;
    for (std::size_t j = 0; j < lx.size(); ++j) {
        sxx += (lx[j] - mx) * (lx[j] - mx);
        sxy += (lx[j] - mx) * (ly[j] - my);
    }
    require(sxx > 0.0, where, "horizons must not all coincide");
    for (std::size_t j = 0; j < lx.size(); ++j) vs += (lx[j] - mx) * (lx[j] - mx) * var[j];
    ScalingFit f;
    f.exponent = sxy / sxx;
    f.intercept = my - f.exponent * mx;
    f.std_error = std::sqrt(vs) / sxx;
    return f;
}

ScalingLawResult scaling_law_check(const CoefficientPath& path, double r, double t0,
                                   const std::vector<std::pair<Vec, Vec>>& probes, std::size_t n_paths,
                                   std::uint64_t seed, int n_steps, double x_exponent_shift) {
    require(r > 0.0, "monte_carlo.scaling_law_check", "r must be positive");
    const double a = path.alpha();
    const double h = std::pow(r, a);
    const auto direct = sample_K(path, t0, t0 + h, n_paths, n_steps, seed);
    const CoefficientPath resc = time_rescale(path, r, t0);
    auto scaled = sample_K(resc, 0.0, 1.0, n_paths, n_steps, seed ^ 0x5deece66dULL);
    const double cx = std::pow(h, 1.0 / a + 1.0 + x_exponent_shift), cv = std::pow(h, 1.0 / a);
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled.X[i] *= cx;
        scaled.V[i] *= cv;
    }
    ScalingLawResult out;
    for (const auto& [xi, eta] : probes)
        out.max_discrepancy =
            std::max(out.max_discrepancy, std::abs(mc_char(direct, xi, eta).value - mc_char(scaled, xi, eta).value));
    out.std_error = 1.0 / std::sqrt(static_cast<double>(n_paths));
    return out;
}

void write_ensemble(const SampleEnsemble& e, std::ostream& os) {
    auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    os.write("KHMC", 4);
    put(static_cast<std::int32_t>(e.dim));
    put(static_cast<std::int32_t>(e.n_steps));
    put(e.seed);
    put(e.s);
    put(e.t);
    put(static_cast<std::uint64_t>(e.size()));
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (int k = 0; k < e.dim; ++k) put(e.X[i](k));
        for (int k = 0; k < e.dim; ++k) put(e.V[i](k));
    }
}

SampleEnsemble read_ensemble(std::istream& is) {
    auto get = [&](auto& v) {
        is.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!is) fail_invalid("monte_carlo.read_ensemble", "truncated ensemble file");
    };
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "KHMC", 4) != 0) fail_invalid("monte_carlo.read_ensemble", "bad magic");
    std::int32_t d, ns;
    std::uint64_t n;
    SampleEnsemble e;
    get(d);
    get(ns);
    get(e.seed);
    get(e.s);
    get(e.t);
    get(n);
    require(d >= 1 && d <= kMaxDim, "monte_carlo.read_ensemble", "bad dimension");
    e.dim = d;
    e.n_steps = ns;
    e.X.assign(n, Vec::Zero(d));
    e.V.assign(n, Vec::Zero(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) get(e.X[i](k));
        for (int k = 0; k < d; ++k) get(e.V[i](k));
    }
    return e;
}

}  // namespace khypo
