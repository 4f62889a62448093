#pragma once

#include "khypo/common.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace khypo::quad {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

// Gauss–Legendre on [-1,1] (Newton on the three-term recurrence).
Rule gauss_legendre(int n);
// Cached copy; the reference stays valid for the life of the process.
const Rule& gauss_legendre_cached(int n);
// Gauss–Jacobi on [-1,1] with weight (1-x)^a (1+x)^b, a,b > -1 (Golub–Welsch).
Rule gauss_jacobi(int n, double a, double b);
// Gauss–Hermite with weight exp(-x^2) (Golub–Welsch).
Rule gauss_hermite(int n);

// Rule for ∫_0^R r^p g(r) dr: nodes r_i and weights absorbing r^p.
Rule radial_power_rule(int n, double p, double R);
// Affine map of a [-1,1] rule onto [a,b].
Rule map_rule(const Rule& ref, double a, double b);
// Composite Gauss–Legendre: `panels` equal panels of n nodes each on [a,b].
Rule composite_gl(double a, double b, int panels, int n);

// Gauss–Kronrod 7/15 pair on [-1,1].
struct GK15 {
    static constexpr double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.0};
    static constexpr double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class T>
struct AdaptiveResult {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    bool converged = true;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }

// One G7K15 panel: returns (kronrod, |kronrod - gauss|).
template <class T, class F>
std::pair<T, double> gk15_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const T fc = f(c);
    T k = fc * GK15::wgk[7];
    T g = fc * GK15::wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * GK15::xgk[j];
        const T f1 = f(c - dx), f2 = f(c + dx);
        k += (f1 + f2) * GK15::wgk[j];
        if (j % 2 == 1) g += (f1 + f2) * GK15::wg[j / 2];
    }
    k *= h;
    g *= h;
    return {k, magnitude(k - g)};
}

// Globally adaptive bisection driven by the largest local error estimate.
// Stops when error <= max(abs_tol, rel_tol*|value|) or max_panels is reached.
template <class T, class F>
AdaptiveResult<T> integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                     double abs_tol = 0.0, int max_panels = 2000) {
    AdaptiveResult<T> out;
    if (!(b > a)) return out;
    struct Panel {
        double a, b;
        T val;
        double err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    std::priority_queue<Panel> heap;
    auto [v0, e0] = gk15_panel<T>(f, a, b);
    out.evaluations = 15;
    heap.push({a, b, v0, e0});
    T total = v0;
    double err = e0;
    int panels = 1;
    while (err > std::max(abs_tol, rel_tol * magnitude(total))) {
        if (panels >= max_panels) {
            out.converged = false;
            break;
        }
        Panel p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        auto [v1, e1] = gk15_panel<T>(f, p.a, m);
        auto [v2, e2] = gk15_panel<T>(f, m, p.b);
        out.evaluations += 30;
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push({p.a, m, v1, e1});
        heap.push({m, p.b, v2, e2});
        ++panels;
    }
    // Re-sum the final panels in position order so the result does not carry
    // the running-update rounding history.
    std::vector<Panel> fin;
    fin.reserve(heap.size());
    while (!heap.empty()) {
        fin.push_back(heap.top());
        heap.pop();
    }
    std::sort(fin.begin(), fin.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    T s{};
    double e = 0.0;
    for (const auto& p : fin) {
        s += p.val;
        e += p.err;
    }
    out.value = s;
    out.error = e;
    return out;
}

}  // namespace khypo::quad
