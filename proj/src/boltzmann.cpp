#include "khypo/boltzmann.hpp"

#include "khypo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace khypo {

void CollisionKernelSpec::validate() const {
    const char* where = "boltzmann_carleman.kernel";
    require(dim == 2 || dim == 3, where, "dimension must be 2 or 3");
    require(alpha > 0.0 && alpha < 2.0, where, "alpha must lie in (0,2)");
    require(gamma + alpha > -1.0 && gamma + alpha < 1.0, where, "gamma + alpha must lie in (-1,1)");
    require(std::isfinite(scale) && scale >= 0.0, where, "scale must be finite and non-negative");
}

double GaussPoly::operator()(const Vec& v) const {
    if (is_constant()) return amp;
    const double r2 = (v - center).squaredNorm();
    return amp * (1.0 + quad * r2) * std::exp(-0.5 * r2 / (width * width));
}

bool GaussPoly::is_constant() const { return !std::isfinite(width); }

GaussPoly GaussPoly::constant(int dim, double c) {
    GaussPoly g;
    g.amp = c;
    g.center = Vec::Zero(dim);
    g.width = std::numeric_limits<double>::infinity();
    return g;
}

GaussPoly GaussPoly::scaled(double c) const {
    GaussPoly g = *this;
    g.amp *= c;
    return g;
}

BoltzQuad BoltzQuad::refined() const {
    BoltzQuad r = *this;
    r.radial_panels = radial_panels * 2;
    r.jacobi_nodes = jacobi_nodes + 6;
    r.dir_nodes = dir_nodes * 3 / 2;
    r.polar_nodes = polar_nodes + 4;
    r.inner_nodes = inner_nodes + 4;
    r.angle_nodes = angle_nodes + 8;
    r.check = false;
    return r;
}

std::vector<Vec> orthogonal_frame(const Vec& w) {
    const int d = static_cast<int>(w.size());
    const Vec e = w.normalized();
    if (d == 2) {
        Vec p(2);
        p << -e(1), e(0);
        return {p};
    }
    // reference axis e_d (e_1 when w is close to it), then the remaining unit axes
    std::vector<Vec> cand{Vec::Unit(d, d - 1)};
    if (std::abs(e(d - 1)) > 0.9) cand[0] = Vec::Unit(d, 0);
    for (int i = 0; i < d; ++i) cand.push_back(Vec::Unit(d, i));
    std::vector<Vec> out;
    for (const auto& c : cand) {
        if (static_cast<int>(out.size()) == d - 1) break;
        Vec a = c - e * e.dot(c);
        for (const auto& b : out) a -= b * b.dot(a);
        if (a.norm() > 0.1) out.push_back(a.normalized());
    }
    return out;
}

namespace {

struct Node {
    Vec x;
    double w;
};

// Unit directions with weights: half sphere (one of each ±e pair) or full sphere.
std::vector<Node> sphere_rule(int d, int dir_nodes, int polar_nodes, bool half) {
    std::vector<Node> out;
    if (d == 2) {
        const int m = half ? dir_nodes : 2 * dir_nodes;
        const double span = half ? kPi : 2.0 * kPi;
        for (int j = 0; j < m; ++j) {
            const double phi = span * j / m;
            Vec e(2);
            e << std::cos(phi), std::sin(phi);
            out.push_back({e, span / m});
        }
        return out;
    }
    const auto z = half ? quad::composite_gl(0.0, 1.0, 1, polar_nodes) : quad::composite_gl(-1.0, 1.0, 2, polar_nodes);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double s = std::sqrt(std::max(0.0, 1.0 - z.x[i] * z.x[i]));
        for (int j = 0; j < dir_nodes; ++j) {
            const double phi = 2.0 * kPi * j / dir_nodes;
            Vec e(3);
            e << s * std::cos(phi), s * std::sin(phi), z.x[i];
            out.push_back({e, z.w[i] * 2.0 * kPi / dir_nodes});
        }
    }
    return out;
}

// ∫_0^R ρ^p g(ρ) dρ: Gauss–Jacobi on [0, ρ0] and GL panels beyond; weights carry ρ^p.
quad::Rule radial_rule(double p, double R, double rho0, const BoltzQuad& q) {
    rho0 = std::min(rho0, R);
    quad::Rule r = quad::radial_power_rule(q.jacobi_nodes, p, rho0);
    if (R > rho0) {
        const auto g = quad::composite_gl(rho0, R, q.radial_panels, q.radial_nodes);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.x.push_back(g.x[i]);
            r.w.push_back(g.w[i] * std::pow(g.x[i], p));
        }
    }
    return r;
}

// Panels on [0, T] starting at `first` and growing geometrically up to `cap`.
std::vector<double> graded_breaks(double first, double cap, double T) {
    std::vector<double> b{0.0};
    double x = 0.0;
    while (x < T) {
        const double step = std::min(cap, std::max(first, x));
        x = std::min(T, x + step);
        b.push_back(x);
    }
    return b;
}

// Quadrature over the hyperplane w^⊥ restricted to |h| <= T; graded at h = 0 on the scale ρ = |w|.
std::vector<Node> hyperplane_rule(const Vec& w, double T, double cap, const BoltzQuad& q) {
    const double rho = w.norm();
    const auto frame = orthogonal_frame(w);
    const auto br = graded_breaks(std::min(2.0 * rho, cap), cap, T);
    const auto& gl = quad::gauss_legendre_cached(q.inner_nodes);
    std::vector<Node> out;
    const int d = static_cast<int>(w.size());
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double c = 0.5 * (br[k] + br[k + 1]), h = 0.5 * (br[k + 1] - br[k]);
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const double s = c + h * gl.x[i], ws = h * gl.w[i];
            if (d == 2) {
                out.push_back({Vec(s * frame[0]), ws});
                out.push_back({Vec(-s * frame[0]), ws});
            } else {
                for (int j = 0; j < q.dir_nodes; ++j) {
                    const double chi = 2.0 * kPi * j / q.dir_nodes;
                    out.push_back({Vec(s * (std::cos(chi) * frame[0] + std::sin(chi) * frame[1])),
                                   ws * s * 2.0 * kPi / q.dir_nodes});
                }
            }
        }
    }
    return out;
}

struct Scales {
    double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0, cmax = 0.0;
};
Scales scales_of(std::initializer_list<const GaussPoly*> fs) {
    Scales s;
    for (const auto* f : fs) {
        if (f->is_constant()) continue;
        s.wmin = std::min(s.wmin, f->width);
        s.wmax = std::max(s.wmax, f->width);
        s.cmax = std::max(s.cmax, f->center.norm());
    }
    if (s.wmax == 0.0) s.wmin = s.wmax = 1.0;
    return s;
}

void check_inputs(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                  const char* where) {
    k.validate();
    require(v.size() == k.dim, where, "velocity dimension mismatch");
    for (const auto* h : {&f, &g})
        require(h->is_constant() || (h->center.size() == k.dim && h->width > 0.0), where, "bad test density");
}

struct CarlemanParts {
    double Q = 0.0, Q2 = 0.0, H = 0.0;
};

CarlemanParts carleman_once(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                            const BoltzQuad& q, double Rw) {
    const int d = k.dim;
    const double p = k.gamma + 1.0 + k.alpha;
    const Scales sf = scales_of({&f});
    const Scales sa = scales_of({&f, &g});
    const auto rad = radial_rule(1.0 - k.alpha, Rw, q.rho0 * sa.wmin, q);
    const auto dirs = sphere_rule(d, q.dir_nodes, q.polar_nodes, true);
    const double gv = g(v);
    std::vector<double> tq(rad.size()), tq2(rad.size()), th(rad.size());
    parallel_for(rad.size(), [&](std::size_t i) {
        const double rho = rad.x[i];
        std::vector<double> aq(dirs.size()), aq2(dirs.size()), ah(dirs.size());
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            const Vec w = rho * dirs[j].x;
            const double T = v.norm() + rho + sf.cmax + q.tail * sf.wmax;
            const auto hp = hyperplane_rule(w, T, 0.5 * sf.wmin, q);
            std::vector<double> a1(hp.size()), a2(hp.size()), a3(hp.size());
            for (std::size_t l = 0; l < hp.size(); ++l) {
                const double wt = 2.0 * hp[l].w * std::pow(hp[l].x.squaredNorm() + rho * rho, 0.5 * p);
                const Vec base = v - hp[l].x;
                a1[l] = wt * f(base);
                a2[l] = wt * f(Vec(base + w));
                a3[l] = wt * f(Vec(base - w));
            }
            const double I1 = pairwise_sum(a1), I2p = pairwise_sum(a2), I2m = pairwise_sum(a3);
            const double gp = g(Vec(v + w)), gm = g(Vec(v - w));
            const double inv = dirs[j].w / (rho * rho);
            aq[j] = inv * ((gp + gm) * I1 - gv * (I2p + I2m));
            aq2[j] = inv * (gp + gm - 2.0 * gv) * I1;
            // 2I1 - I2p - I2m summed termwise to keep the second difference
            std::vector<double> hd(hp.size());
            for (std::size_t l = 0; l < hp.size(); ++l) hd[l] = (a1[l] - a2[l]) + (a1[l] - a3[l]);
            ah[j] = inv * pairwise_sum(hd);
        }
        tq[i] = rad.w[i] * pairwise_sum(aq);
        tq2[i] = rad.w[i] * pairwise_sum(aq2);
        th[i] = rad.w[i] * pairwise_sum(ah);
    });
    CarlemanParts out;
    out.Q = k.scale * pairwise_sum(tq);
    out.Q2 = k.scale * pairwise_sum(tq2);
    out.H = k.scale * pairwise_sum(th);
    return out;
}

double auto_truncation(const GaussPoly& f, const GaussPoly& g, const Vec& v, const BoltzQuad& q) {
    if (q.truncation > 0.0) return q.truncation;
    const Scales s = scales_of({&f, &g});
    return v.norm() + s.cmax + q.tail * s.wmax;
}

void accuracy_guard(double coarse, double fine, double floor, double tol, const char* where) {
    const double scale = std::max(std::abs(fine), floor);
    if (std::abs(coarse - fine) > tol * scale) {
        std::ostringstream os;
        os << where << ": refinement changed the value from " << coarse << " to " << fine;
        throw AccuracyError(os.str());
    }
}

CarlemanParts carleman_checked(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                               const BoltzQuad& q, double& Rw) {
    const char* where = "boltzmann_carleman.collision_Q_carleman";
    check_inputs(f, g, k, v, where);
    require(!f.is_constant(), where, "f must decay (the hyperplane integrals diverge for constant f)");
    Rw = auto_truncation(f, g, v, q);
    if (k.scale == 0.0 || f.amp == 0.0) return {};
    if (!q.check) return carleman_once(f, g, k, v, q, Rw);
    const auto c = carleman_once(f, g, k, v, q, Rw);
    const auto r = carleman_once(f, g, k, v, q.refined(), Rw);
    const double floor = 1e-6 * std::abs(f.amp * g.amp) * k.scale;
    accuracy_guard(c.Q, r.Q, floor, q.tol, where);
    return r;
}

double spherical_once(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                      const BoltzQuad& q, double R) {
    const int d = k.dim;
    const double a = k.alpha;
    const Scales s = scales_of({&f, &g});
    const auto rad = radial_rule(d - 1.0 + k.gamma, R, q.rho0 * s.wmin, q);
    const auto udirs = sphere_rule(d, q.dir_nodes, q.polar_nodes, false);
    // grazing angle ε = π/2 - θ: Jacobi weight ε^{1-α} near 0, GL panels beyond
    constexpr double eps0 = kPi / 16.0;
    quad::Rule er = quad::radial_power_rule(q.angle_nodes, 1.0 - a, eps0);
    for (std::size_t i = 0; i < er.size(); ++i) er.w[i] *= std::pow(er.x[i], a - 1.0);
    {
        const auto g2 = quad::composite_gl(eps0, 0.5 * kPi, 7, q.inner_nodes);
        er.x.insert(er.x.end(), g2.x.begin(), g2.x.end());
        er.w.insert(er.w.end(), g2.w.begin(), g2.w.end());
    }
    std::vector<double> ew(er.size());
    for (std::size_t i = 0; i < er.size(); ++i) {
        const double se = std::sin(er.x[i]);
        // b(sin ε) · (dω density: cos ε for d = 3) · 2 for the ω ↔ -ω fold
        ew[i] = 2.0 * er.w[i] * std::pow(se, -1.0 - a) * (d == 3 ? std::cos(er.x[i]) : 1.0);
    }
    const int nchi = d == 3 ? q.dir_nodes / 2 : 1;
    const double gv = g(v);
    std::vector<double> tot(rad.size());
    parallel_for(rad.size(), [&](std::size_t i) {
        const double rho = rad.x[i];
        std::vector<double> acc(udirs.size());
        for (std::size_t j = 0; j < udirs.size(); ++j) {
            const Vec uh = udirs[j].x;
            const Vec vs = v - rho * uh;
            const double loss = f(vs) * gv;
            const auto fr = orthogonal_frame(uh);
            std::vector<double> ang(er.size());
            for (std::size_t e = 0; e < er.size(); ++e) {
                const double ct = std::sin(er.x[e]), st = std::cos(er.x[e]);  // cos θ, sin θ
                double pair = 0.0;
                for (int c = 0; c < nchi; ++c) {
                    Vec tang = fr[0];
                    if (d == 3) {
                        const double chi = kPi * c / nchi;
                        tang = std::cos(chi) * fr[0] + std::sin(chi) * fr[1];
                    }
                    for (double sg : {1.0, -1.0}) {
                        const Vec om = ct * uh + sg * st * tang;
                        const Vec kw = (rho * ct) * om;
                        pair += f(Vec(vs + kw)) * g(Vec(v - kw)) - loss;
                    }
                }
                ang[e] = ew[e] * pair * (d == 3 ? kPi / nchi : 1.0);
            }
            acc[j] = udirs[j].w * pairwise_sum(ang);
        }
        tot[i] = rad.w[i] * pairwise_sum(acc);
    });
    return k.scale * pairwise_sum(tot);
}

}  // namespace

double collision_Q_carleman(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                            const BoltzQuad& q) {
    double Rw = 0.0;
    return carleman_checked(f, g, k, v, q, Rw).Q;
}

double collision_Q_spherical(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                             const BoltzQuad& q) {
    const char* where = "boltzmann_carleman.collision_Q_spherical";
    check_inputs(f, g, k, v, where);
    if (k.scale == 0.0 || f.amp == 0.0 || g.amp == 0.0) return 0.0;
    const double R = auto_truncation(f, g, v, q);
    if (!q.check) return spherical_once(f, g, k, v, q, R);
    const double c = spherical_once(f, g, k, v, q, R);
    const double r = spherical_once(f, g, k, v, q.refined(), R);
    accuracy_guard(c, r, 1e-6 * std::abs(f.amp * g.amp) * k.scale, q.tol, where);
    return r;
}

double kernel_Kf(const GaussPoly& f, const CollisionKernelSpec& k, const Vec& v, const Vec& w, const BoltzQuad& q) {
    const char* where = "boltzmann_carleman.kernel_Kf";
    k.validate();
    require(w.size() == k.dim && v.size() == k.dim, where, "dimension mismatch");
    require(w.norm() > 0.0, where, "w must be non-zero");
    require(!f.is_constant(), where, "f must decay");
    if (f.amp == 0.0 || k.scale == 0.0) return 0.0;
    const double p = k.gamma + 1.0 + k.alpha, rho = w.norm();
    const Scales sf = scales_of({&f});
    const double T = v.norm() + rho + sf.cmax + q.tail * sf.wmax;
    const auto hp = hyperplane_rule(w, T, 0.5 * sf.wmin, q);
    std::vector<double> a(hp.size());
    for (std::size_t l = 0; l < hp.size(); ++l)
        a[l] = 2.0 * hp[l].w * std::pow(hp[l].x.squaredNorm() + rho * rho, 0.5 * p) * f(Vec(v - hp[l].x));
    return k.scale * pairwise_sum(a);
}

CollisionSplit collision_split(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                               const BoltzQuad& q) {
    CollisionSplit out;
    const auto parts = carleman_checked(f, g, k, v, q, out.truncation);
    out.Q = parts.Q;
    out.Q2 = parts.Q2;
    out.Hf = parts.H;
    out.Q1 = g(v) * parts.H;
    const double Rw = out.truncation;
    const double tol_scale = std::max({std::abs(out.Q), std::abs(out.Q1), std::abs(out.Q2),
                                       1e-6 * std::abs(f.amp * g.amp) * k.scale});
    if (std::abs(out.Q1 + out.Q2 - out.Q) > 2.0 * q.tol * tol_scale)
        throw ConsistencyError("boltzmann_carleman.collision_split: Q1 + Q2 does not reproduce Q");
    (void)Rw;
    out.Kf = [f, k, v, q](const Vec& w) { return kernel_Kf(f, k, v, w, q); };
    return out;
}

// ---- co-area identity ----------------------------------------------------------------

namespace {

struct CoareaNodes {
    int panels, dir, polar;
};
CoareaNodes coarea_nodes(int d, int level) {
    if (d == 2) return {8 + 4 * (level - 1), 32 + 16 * (level - 1), 0};
    return {4 + 2 * (level - 1), 12 + 6 * (level - 1), 6 + 3 * (level - 1)};
}

double coarea_lhs(const PhaseFn& F, int d, double box, int level) {
    const auto nc = coarea_nodes(d, level);
    const auto r = quad::composite_gl(-box, box, 2 * nc.panels, 8);
    const auto dirs = sphere_rule(d, nc.dir, nc.polar, false);
    const std::size_t n = r.size();
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    std::vector<double> terms(total);
    parallel_for(total, [&](std::size_t idx) {
        Vec x(d);
        double w = 1.0;
        std::size_t m = idx;
        for (int i = 0; i < d; ++i) {
            x(i) = r.x[m % n];
            w *= r.w[m % n];
            m /= n;
        }
        std::vector<double> s(dirs.size());
        for (std::size_t j = 0; j < dirs.size(); ++j) s[j] = dirs[j].w * F(x, dirs[j].x);
        terms[idx] = w * pairwise_sum(s);
    });
    return pairwise_sum(terms);
}

double coarea_rhs(const PhaseFn& F, int d, bool symmetric, double box, int level) {
    const auto nc = coarea_nodes(d, level);
    const auto rr = quad::composite_gl(0.0, box, nc.panels, 8);
    const auto hr = quad::composite_gl(-box, box, 2 * nc.panels, 8);
    const auto dirs = sphere_rule(d, nc.dir, nc.polar, false);
    std::vector<double> terms(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t j) {
        const Vec om = dirs[j].x;
        const auto fr = orthogonal_frame(om);
        std::vector<double> acc;
        const std::size_t nh = hr.size();
        const std::size_t nplane = d == 2 ? nh : nh * nh;
        for (std::size_t i = 0; i < rr.size(); ++i) {
            const double rho = rr.x[i];
            // |w|^{d-1} dρ dω cancels |w|^{1-d}
            for (std::size_t l = 0; l < nplane; ++l) {
                Vec h = hr.x[l % nh] * fr[0];
                double wh = hr.w[l % nh];
                if (d == 3) {
                    h += hr.x[l / nh] * fr[1];
                    wh *= hr.w[l / nh];
                }
                const double val = symmetric ? 2.0 * F(Vec(h + rho * om), om)
                                             : F(Vec(h + rho * om), om) + F(Vec(h - rho * om), om);
                acc.push_back(rr.w[i] * wh * val);
            }
        }
        terms[j] = dirs[j].w * pairwise_sum(acc);
    });
    return pairwise_sum(terms);
}

}  // namespace

CoareaResult coarea_identity_check(const PhaseFn& F, int dim, bool symmetric, double box, int level) {
    const char* where = "boltzmann_carleman.coarea_identity_check";
    require(dim == 2 || dim == 3, where, "dimension must be 2 or 3");
    require(box > 0.0 && level >= 1, where, "bad quadrature parameters");
    CoareaResult out;
    out.lhs = coarea_lhs(F, dim, box, level);
    out.rhs = coarea_rhs(F, dim, symmetric, box, level);
    const double l2 = coarea_lhs(F, dim, box, level + 1);
    const double r2 = coarea_rhs(F, dim, symmetric, box, level + 1);
    const double sc = std::max({std::abs(out.lhs), std::abs(out.rhs), std::abs(l2), std::abs(r2)});
    if (sc == 0.0) return out;
    if (std::abs(l2 - out.lhs) > 1e-2 * sc || std::abs(r2 - out.rhs) > 1e-2 * sc)
        throw AccuracyError(std::string(where) + ": quadrature changed by more than 1e-2 under refinement");
    out.lhs = l2;
    out.rhs = r2;
    out.rel_error = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.lhs), std::abs(out.rhs));
    return out;
}

}  // namespace khypo
