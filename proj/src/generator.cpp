#include "khypo/generator.hpp"

#include "khypo/quadrature.hpp"
#include "khypo/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace khypo {

// ---- test function defaults --------------------------------------------------

std::function<double(double)> TestFunction::even_line(const Vec& x, const Vec& v, const Vec& e) const {
    return [this, x, v, e](double y) { return value(x, Vec(v + y * e)) + value(x, Vec(v - y * e)); };
}

double TestFunction::far_field(const Vec&, const Vec&, const Vec&, double, double) const { return 0.0; }

bool TestFunction::support(Vec&, Vec&, Vec&, Vec&) const { return false; }

// ---- Gaussian ------------------------------------------------------------------

GaussianTest::GaussianTest(Vec cx, Vec cv, double wx, double wv, double amplitude)
    : cx_(std::move(cx)), cv_(std::move(cv)), wx_(wx), wv_(wv), a_(amplitude) {
    require(cx_.size() == cv_.size() && cx_.size() >= 1, "kinetic_semigroup.GaussianTest", "dimension mismatch");
    require(wx > 0.0 && wv > 0.0, "kinetic_semigroup.GaussianTest", "widths must be positive");
}

double GaussianTest::value(const Vec& x, const Vec& v) const {
    return a_ * std::exp(-0.5 * (x - cx_).squaredNorm() / (wx_ * wx_) - 0.5 * (v - cv_).squaredNorm() / (wv_ * wv_));
}

Vec GaussianTest::grad_x(const Vec& x, const Vec& v) const { return -value(x, v) * (x - cx_) / (wx_ * wx_); }

Vec GaussianTest::grad_v(const Vec& x, const Vec& v) const { return -value(x, v) * (v - cv_) / (wv_ * wv_); }

Mat GaussianTest::hess_v(const Vec& x, const Vec& v) const {
    const Vec dv = v - cv_;
    const double w2 = wv_ * wv_;
    const int d = dim();
    return value(x, v) * (Mat(dv * dv.transpose()) / (w2 * w2) - Mat::Identity(d, d) / w2);
}

double GaussianTest::tail_radius(const Vec&, const Vec& v) const {
    return (v - cv_).norm() + wv_ * std::sqrt(2.0 * std::log(1e13));
}

// ---- plane wave ------------------------------------------------------------------

PlaneWave::PlaneWave(Vec xi0, Vec eta0, double phase) : xi0_(std::move(xi0)), eta0_(std::move(eta0)), phase_(phase) {
    require(xi0_.size() == eta0_.size() && xi0_.size() >= 1, "kinetic_semigroup.PlaneWave", "dimension mismatch");
}

double PlaneWave::value(const Vec& x, const Vec& v) const { return std::cos(xi0_.dot(x) + eta0_.dot(v) + phase_); }

Vec PlaneWave::grad_x(const Vec& x, const Vec& v) const {
    return -std::sin(xi0_.dot(x) + eta0_.dot(v) + phase_) * xi0_;
}

Vec PlaneWave::grad_v(const Vec& x, const Vec& v) const {
    return -std::sin(xi0_.dot(x) + eta0_.dot(v) + phase_) * eta0_;
}

Mat PlaneWave::hess_v(const Vec& x, const Vec& v) const {
    return -std::cos(xi0_.dot(x) + eta0_.dot(v) + phase_) * Mat(eta0_ * eta0_.transpose());
}

std::function<double(double)> PlaneWave::even_line(const Vec& x, const Vec& v, const Vec& e) const {
    const double c = 2.0 * value(x, v), k = eta0_.dot(e);
    return [c, k](double y) { return c * std::cos(k * y); };
}

double PlaneWave::far_field(const Vec& x, const Vec& v, const Vec& e, double R, double alpha) const {
    const double k = eta0_.dot(e);
    const double c = 2.0 * value(x, v);
    if (k == 0.0) return c * std::pow(R, -alpha) / alpha;
    // ∫_R^∞ e^{ikr} r^{-1-α} dr = -e^{ikR} Σ_j (1+α)_j R^{-1-α-j} / (ik)^{j+1}  (asymptotic in kR)
    const cplx ik(0.0, k);
    cplx term = std::pow(R, -1.0 - alpha) / ik, sum = term;
    for (int j = 1; j < 40; ++j) {
        const cplx nxt = term * ((alpha + j) / (R * ik));
        if (std::abs(nxt) >= std::abs(term)) break;
        term = nxt;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    const cplx I = -std::polar(1.0, k * R) * sum;
    return c * I.real();
}

// ---- compact bump ------------------------------------------------------------------

namespace {

struct Bump1 {
    double b = 0.0, g1 = 0.0, g2 = 0.0;  // b(y), g'(y), g''(y) with b = e^{g}
};

Bump1 bump1(double y) {
    Bump1 r;
    const double q = 1.0 - y * y;
    if (q <= 0.0) return r;
    r.b = std::exp(-1.0 / q);
    r.g1 = -2.0 * y / (q * q);
    r.g2 = -(2.0 + 6.0 * y * y) / (q * q * q);
    return r;
}

}  // namespace

BumpTest::BumpTest(Vec cx, Vec cv, double rx, double rv) : cx_(std::move(cx)), cv_(std::move(cv)), rx_(rx), rv_(rv) {
    require(cx_.size() == cv_.size() && cx_.size() >= 1, "kinetic_semigroup.BumpTest", "dimension mismatch");
    require(rx > 0.0 && rv > 0.0, "kinetic_semigroup.BumpTest", "radii must be positive");
}

double BumpTest::value(const Vec& x, const Vec& v) const {
    double p = 1.0;
    for (int i = 0; i < dim() && p != 0.0; ++i) p *= bump1((x(i) - cx_(i)) / rx_).b * bump1((v(i) - cv_(i)) / rv_).b;
    return p;
}

Vec BumpTest::grad_x(const Vec& x, const Vec& v) const {
    const double f = value(x, v);
    Vec g = Vec::Zero(dim());
    if (f == 0.0) return g;
    for (int i = 0; i < dim(); ++i) g(i) = f * bump1((x(i) - cx_(i)) / rx_).g1 / rx_;
    return g;
}

Vec BumpTest::grad_v(const Vec& x, const Vec& v) const {
    const double f = value(x, v);
    Vec g = Vec::Zero(dim());
    if (f == 0.0) return g;
    for (int i = 0; i < dim(); ++i) g(i) = f * bump1((v(i) - cv_(i)) / rv_).g1 / rv_;
    return g;
}

Mat BumpTest::hess_v(const Vec& x, const Vec& v) const {
    const int d = dim();
    const double f = value(x, v);
    Mat h = Mat::Zero(d, d);
    if (f == 0.0) return h;
    std::vector<Bump1> b(d);
    for (int i = 0; i < d; ++i) b[i] = bump1((v(i) - cv_(i)) / rv_);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            h(i, j) = f * (i == j ? b[i].g1 * b[i].g1 + b[i].g2 : b[i].g1 * b[j].g1) / (rv_ * rv_);
    return h;
}

double BumpTest::tail_radius(const Vec&, const Vec& v) const {
    return (v - cv_).norm() + rv_ * std::sqrt(static_cast<double>(dim()));
}

bool BumpTest::support(Vec& x_lo, Vec& x_hi, Vec& v_lo, Vec& v_hi) const {
    x_lo = cx_.array() - rx_;
    x_hi = cx_.array() + rx_;
    v_lo = cv_.array() - rv_;
    v_hi = cv_.array() + rv_;
    return true;
}

// ---- wave sum ------------------------------------------------------------------

WaveSumTest::WaveSumTest(FieldSlice slice, double center_v, double radius_v)
    : sl_(std::move(slice)), cv_(center_v), rv_(radius_v) {
    for (double e : sl_.eta) freq_ = std::max(freq_, std::abs(e));
    for (std::size_t i = 0; i < sl_.rows(); ++i)
        for (std::size_t k = sl_.row[i]; k < sl_.row[i + 1]; ++k)
            mag_ += sl_.xi_w[i] * sl_.eta_w[k] * std::abs(sl_.val[k]);
    mag_ /= 4.0 * kPi * kPi;
}

double WaveSumTest::moment(double x, double v, int a, int b) const {
    cplx total(0.0, 0.0);
    const cplx mi(0.0, -1.0);
    for (std::size_t i = 0; i < sl_.rows(); ++i) {
        cplx row(0.0, 0.0);
        for (std::size_t k = sl_.row[i]; k < sl_.row[i + 1]; ++k) {
            cplx c = sl_.eta_w[k] * sl_.val[k] * std::polar(1.0, -(x * sl_.xi[i] + v * sl_.eta[k]));
            for (int j = 0; j < b; ++j) c *= mi * sl_.eta[k];
            row += c;
        }
        for (int j = 0; j < a; ++j) row *= mi * sl_.xi[i];
        total += sl_.xi_w[i] * row;
    }
    return total.real() / (4.0 * kPi * kPi);
}

double WaveSumTest::value(const Vec& x, const Vec& v) const { return moment(x(0), v(0), 0, 0); }
Vec WaveSumTest::grad_x(const Vec& x, const Vec& v) const { return Vec::Constant(1, moment(x(0), v(0), 1, 0)); }
Vec WaveSumTest::grad_v(const Vec& x, const Vec& v) const { return Vec::Constant(1, moment(x(0), v(0), 0, 1)); }
Mat WaveSumTest::hess_v(const Vec& x, const Vec& v) const { return Mat::Constant(1, 1, moment(x(0), v(0), 0, 2)); }

double WaveSumTest::tail_radius(const Vec&, const Vec& v) const { return std::abs(v(0) - cv_) + rv_; }

std::function<double(double)> WaveSumTest::even_line(const Vec& x, const Vec& v, const Vec& e) const {
    std::vector<double> amp, kap;
    amp.reserve(sl_.val.size());
    kap.reserve(sl_.val.size());
    for (std::size_t i = 0; i < sl_.rows(); ++i)
        for (std::size_t k = sl_.row[i]; k < sl_.row[i + 1]; ++k) {
            const cplx c = sl_.xi_w[i] * sl_.eta_w[k] * sl_.val[k] *
                           std::polar(1.0, -(x(0) * sl_.xi[i] + v(0) * sl_.eta[k]));
            amp.push_back(2.0 * c.real() / (4.0 * kPi * kPi));
            kap.push_back(sl_.eta[k] * e(0));
        }
    return [amp = std::move(amp), kap = std::move(kap)](double y) {
        double s = 0.0;
        for (std::size_t k = 0; k < amp.size(); ++k) s += amp[k] * std::cos(y * kap[k]);
        return s;
    };
}

// ---- jump integral ---------------------------------------------------------------

namespace {

const quad::Rule& inner_rule(int n, double alpha) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, quad::Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, alpha);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, quad::radial_power_rule(n, 1.0 - alpha, 1.0)).first;
    return it->second;
}

// ∫_0^∞ [φ(v+re) + φ(v-re) - 2φ(v)] r^{-1-α} dr
// `mag` collects max |φ| seen along the line (reference size for the accuracy check).
double directional(const TestFunction& phi, const Vec& x, const Vec& v, const Vec& e, double alpha,
                   const GeneratorQuad& q, int level, double& mag) {
    const double en = e.norm();
    if (en == 0.0) return 0.0;
    const double phi0 = phi.value(x, v);
    const auto S = phi.even_line(x, v, e);
    const double he = e.dot(phi.hess_v(x, v) * e);
    const double freq = std::max(phi.frequency_scale(), 1e-300);

    // inner part: δ²/r² against the weight r^{1-α}
    const auto& ir = inner_rule(q.inner_nodes * level, alpha);
    double inner = 0.0;
    for (std::size_t i = 0; i < ir.size(); ++i) {
        const double r = ir.x[i];
        double d2 = he;
        if (r * en * freq >= 1e-4) {
            const double sr = S(r);
            mag = std::max(mag, 0.5 * std::abs(sr));
            d2 = (sr - 2.0 * phi0) / (r * r);
        }
        inner += ir.w[i] * d2;
    }

    // outer part up to R, the rest analytically
    double R = phi.tail_radius(x, v) / en;
    double far = 0.0;
    if (!std::isfinite(R)) {
        R = std::max(q.r_max, 60.0 / (en * freq));
        far = phi.far_field(x, v, e, R, alpha);
    }
    double outer = -2.0 * phi0 / alpha + far;
    if (R > 1.0) {
        const double L = std::min(q.outer_panel, 0.5 * kPi / (en * freq)) / level;
        const int panels = static_cast<int>(std::ceil((R - 1.0) / L));
        const auto& gl = quad::gauss_legendre_cached(q.outer_nodes);
        const double h = (R - 1.0) / panels;
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double c = 1.0 + (p + 0.5) * h;
            double s = 0.0;
            for (std::size_t i = 0; i < gl.size(); ++i) {
                const double r = c + 0.5 * h * gl.x[i];
                const double sr = S(r);
                mag = std::max(mag, 0.5 * std::abs(sr));
                s += gl.w[i] * sr * std::pow(r, -1.0 - alpha);
            }
            acc += 0.5 * h * s;
        }
        outer += acc;
    }
    return inner + outer;
}

double levy_at_level(const StableMeasure& nu, const Mat& sigma, const TestFunction& phi, const Vec& x, const Vec& v,
                     const GeneratorQuad& q, int level, double& mag) {
    const int d = nu.dim();
    const double a = nu.alpha();
    double total = 0.0;
    for (const auto& p : nu.paired_atoms()) total += p.weight * directional(phi, x, v, Vec(sigma * p.dir), a, q, level, mag);
    const double iso = nu.iso_weight();
    if (iso > 0.0) {
        if (d == 1) {
            total += iso * 2.0 * directional(phi, x, v, Vec(sigma.col(0)), a, q, level, mag);
        } else if (d == 2) {
            const int n = q.dir_nodes;
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                const double ang = kPi * j / n;
                Vec th(2);
                th << std::cos(ang), std::sin(ang);
                s += directional(phi, x, v, Vec(sigma * th), a, q, level, mag);
            }
            total += iso * 2.0 * kPi / n * s;
        } else {
            const auto zr = quad::map_rule(quad::gauss_legendre_cached(std::max(4, q.dir_nodes / 2)), 0.0, 1.0);
            const int n = q.dir_nodes;
            double s = 0.0;
            for (std::size_t i = 0; i < zr.size(); ++i) {
                const double z = zr.x[i], rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                double ring = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double ang = 2.0 * kPi * j / n;
                    Vec th(3);
                    th << rho * std::cos(ang), rho * std::sin(ang), z;
                    ring += directional(phi, x, v, Vec(sigma * th), a, q, level, mag);
                }
                s += zr.w[i] * ring * 2.0 * kPi / n;
            }
            total += iso * 2.0 * s;
        }
    }
    return total;
}

}  // namespace

double apply_levy(const StableMeasure& nu, const Mat& sigma, const TestFunction& phi, const Vec& x, const Vec& v,
                  const GeneratorQuad& q) {
    const char* where = "kinetic_semigroup.apply_generator";
    require(phi.dim() == nu.dim() && x.size() == nu.dim() && v.size() == nu.dim(), where, "dimension mismatch");
    require(sigma.rows() == nu.dim() && sigma.cols() == nu.dim(), where, "sigma shape mismatch");
    double mag = 0.0;
    const double coarse = levy_at_level(nu, sigma, phi, x, v, q, 1, mag);
    const double fine = levy_at_level(nu, sigma, phi, x, v, q, 2, mag);
    const double phi0 = std::max({std::abs(phi.value(x, v)), mag, phi.magnitude()});
    const double hs = phi.hess_v(x, v).norm() * std::pow(op_norm(sigma), 2.0);
    const double scale = std::max({std::abs(fine), phi0 * nu.total_mass() / nu.alpha(),
                                   hs * nu.total_mass() / (2.0 - nu.alpha())});
    if (std::abs(coarse - fine) > q.tol * scale) {
        std::ostringstream os;
        os << where << ": jump integral refinement disagreement " << std::abs(coarse - fine) << " exceeds "
           << q.tol * scale;
        throw AccuracyError(os.str());
    }
    return fine;
}

double apply_generator(const CoefficientPath& path, const TestFunction& phi, double s, const Vec& x, const Vec& v,
                       const GeneratorQuad& q) {
    const std::size_t k = path.piece_at(s);
    return apply_levy(path.nu(k), path.sigma(k), phi, x, v, q) + (path.U(k) * v).dot(phi.grad_x(x, v));
}

double apply_adjoint_generator(const CoefficientPath& path, const TestFunction& phi, double t, const Vec& x,
                               const Vec& v, const GeneratorQuad& q) {
    const std::size_t k = path.piece_at(t);
    return apply_levy(path.nu(k), path.sigma(k), phi, x, v, q) - (path.U(k) * v).dot(phi.grad_x(x, v));
}

// ---- weak form --------------------------------------------------------------------

static double min_lobe_width_eta(const Source& src) {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& l : src.lobes()) w = std::min(w, l.width_eta(0));
    return w;
}

WeakResidual weak_solution_residual(const CoefficientPath& path, const Source& src, double lambda,
                                    const TestFunction& phi, double s, double T, const WeakSpec& spec) {
    const char* where = "kinetic_semigroup.weak_solution_residual";
    require(path.dim() == 1 && src.dim() == 1 && phi.dim() == 1, where, "implemented for d = 1");
    require(s <= T, where, "requires s <= T");
    Vec xl, xh, vl, vh;
    if (!phi.support(xl, xh, vl, vh)) fail_invalid(where, "test function must be compactly supported");
    if (spec.resolved_box.size() == 4) {
        const auto& b = spec.resolved_box;
        if (xl(0) < b[0] || xh(0) > b[1] || vl(0) < b[2] || vh(0) > b[3])
            fail_invalid(where, "support of the test function escapes the resolved region");
    }
    WeakResidual out;
    if (s == T) return out;

    const auto rx = quad::composite_gl(xl(0), xh(0), spec.space_panels, spec.space_nodes);
    // 𝓛φ is not compactly supported in v: the v rule spans the envelope of u as well.
    double ulo = -spec.envelope / min_lobe_width_eta(src), uhi = -ulo;
    if (spec.resolved_box.size() == 4) ulo = spec.resolved_box[2], uhi = spec.resolved_box[3];
    quad::Rule rv;
    auto append = [&](double a, double b, int panels, int n) {
        if (!(b > a)) return;
        const auto r = quad::composite_gl(a, b, panels, n);
        rv.x.insert(rv.x.end(), r.x.begin(), r.x.end());
        rv.w.insert(rv.w.end(), r.w.begin(), r.w.end());
    };
    auto tail_panels = [&](double len) { return std::max(1, static_cast<int>(std::ceil(len / spec.tail_panel))); };
    append(ulo, vl(0), tail_panels(vl(0) - ulo), 8);
    append(vl(0), vh(0), spec.space_panels, spec.space_nodes);
    append(vh(0), uhi, tail_panels(uhi - vh(0)), 8);
    const std::size_t nx = rx.size(), nv = rv.size();

    struct TNode {
        double t, w;
        std::size_t piece;
    };
    std::vector<TNode> tn;
    path.for_each_segment(s, T, [&](double a, double b, std::size_t k) {
        const auto r = quad::composite_gl(a, b, spec.time_panels, spec.time_nodes);
        for (std::size_t i = 0; i < r.size(); ++i) tn.push_back({r.x[i], r.w[i], k});
    });
    std::vector<double> times{s, T};
    for (const auto& n : tn) times.push_back(n.t);
    const SpectralField u = resolvent_snapshots(path, src, lambda, times, spec.grid);

    auto pair_w = [&](std::size_t l, std::size_t j) { return rx.w[l] * rv.w[j]; };
    auto inner_with = [&](const std::vector<double>& uu, const std::vector<double>& g) {
        std::vector<double> terms(nx * nv);
        for (std::size_t l = 0; l < nx; ++l)
            for (std::size_t j = 0; j < nv; ++j) terms[l * nv + j] = pair_w(l, j) * uu[l * nv + j] * g[l * nv + j];
        return pairwise_sum(terms);
    };

    std::vector<double> phiv(nx * nv);
    for (std::size_t l = 0; l < nx; ++l)
        for (std::size_t j = 0; j < nv; ++j)
            phiv[l * nv + j] = phi.value(Vec::Constant(1, rx.x[l]), Vec::Constant(1, rv.x[j]));

    // (𝒦*_t - λ)φ per coefficient piece
    std::map<std::size_t, std::vector<double>> kstar;
    for (const auto& n : tn) {
        if (kstar.count(n.piece)) continue;
        std::vector<double> g(nx * nv);
        parallel_for(nx, [&](std::size_t l) {
            for (std::size_t j = 0; j < nv; ++j) {
                const Vec x = Vec::Constant(1, rx.x[l]), v = Vec::Constant(1, rv.x[j]);
                g[l * nv + j] = apply_adjoint_generator(path, phi, n.t, x, v, spec.gen) - lambda * phiv[l * nv + j];
            }
        });
        kstar.emplace(n.piece, std::move(g));
    }

    const auto us = inverse_transform_points(u.slices[0], rx.x, rv.x);
    const auto uT = inverse_transform_points(u.slices[1], rx.x, rv.x);
    const double lhs = inner_with(us, phiv);
    const double bT = inner_with(uT, phiv);
    std::vector<double> gen_terms(tn.size());
    for (std::size_t i = 0; i < tn.size(); ++i) {
        const auto ut = inverse_transform_points(u.slices[2 + i], rx.x, rv.x);
        gen_terms[i] = tn[i].w * inner_with(ut, kstar.at(tn[i].piece));
    }
    const double gen = pairwise_sum(gen_terms);

    double src_term = 0.0;
    const auto [ta, tb] = src.window();
    const double a = std::max(s, ta), b = std::min(T, tb);
    if (b > a) {
        const auto rt = quad::composite_gl(a, b, spec.source_panels, 8);
        std::vector<double> terms(rt.size());
        for (std::size_t i = 0; i < rt.size(); ++i) {
            std::vector<double> fv(nx * nv);
            for (std::size_t l = 0; l < nx; ++l)
                for (std::size_t j = 0; j < nv; ++j)
                    fv[l * nv + j] = src.value(rt.x[i], Vec::Constant(1, rx.x[l]), Vec::Constant(1, rv.x[j]));
            terms[i] = rt.w[i] * inner_with(fv, phiv);
        }
        src_term = pairwise_sum(terms);
    }
    out.lhs = lhs;
    out.rhs = bT + gen + src_term;
    out.residual = std::abs(out.lhs - out.rhs);
    out.scale = std::max({std::abs(lhs), std::abs(bT), std::abs(gen), std::abs(src_term)});
    double unorm = 0.0;
    for (const auto& sl : u.slices) {
        SpectralField one;
        one.slices.push_back(sl);
        unorm = std::max(unorm, frac_norm_l2(one, 0.0, 0.0));
    }
    std::vector<double> p2(nx * nv);
    for (std::size_t q = 0; q < p2.size(); ++q) p2[q] = rx.w[q / nv] * rv.w[q % nv] * phiv[q] * phiv[q];
    out.norm_scale = unorm * std::sqrt(pairwise_sum(p2));
    return out;
}

// ---- backward Kolmogorov -----------------------------------------------------------

double kolmogorov_residual(const CoefficientPath& path, const Source& src, double tf, double s, double t,
                           const std::vector<std::pair<double, double>>& probes, double h,
                           const KolmogorovSpec& spec) {
    const char* where = "kinetic_semigroup.kolmogorov_residual";
    require(path.dim() == 1 && src.dim() == 1, where, "implemented for d = 1");
    require(s < t, where, "requires s < t");
    require(h > 0.0 && s + 2.0 * h <= t, where, "difference stencil must stay below t");
    for (const auto& p : probes)
        require(std::isfinite(p.first) && std::isfinite(p.second), where, "probe points must be finite");
    if (path.piece_at(s - 2.0 * h) != path.piece_at(s + 2.0 * h))
        fail_invalid(where, "difference stencil crosses a coefficient breakpoint");

    double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
    for (int j = -2; j <= 2; ++j) {
        const double p = path.flow(s + j * h, t)(0, 0);
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
    }
    const auto lobes = src.lobes();
    const FieldSlice layout = make_layout(lobes, pmin, pmax, spec.grid);
    const FourierFn fh = [&](const Vec& xi, const Vec& eta) { return src.hat(tf, xi, eta); };
    std::vector<FieldSlice> st(5, layout);
    for (int j = -2; j <= 2; ++j) {
        FieldSlice& sl = st[j + 2];
        sl.s = s + j * h;
        fill_slice(sl, [&](double xi, double eta) {
            return apply_semigroup_hat(path, fh, sl.s, t, Vec::Constant(1, xi), Vec::Constant(1, eta));
        });
    }
    double wmin = std::numeric_limits<double>::infinity();
    for (const auto& l : lobes) wmin = std::min(wmin, l.width_eta(0));
    const WaveSumTest u0(st[2], 0.0, spec.envelope / wmin);
    std::vector<double> res(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
        const double x = probes[i].first, v = probes[i].second;
        double u[5];
        for (int j = 0; j < 5; ++j) u[j] = eval_point(st[j], x, v);
        const double ds = (-u[4] + 8.0 * u[3] - 8.0 * u[1] + u[0]) / (12.0 * h);
        const double ku = apply_generator(path, u0, s, Vec::Constant(1, x), Vec::Constant(1, v), spec.gen);
        res[i] = std::abs(ds + ku);
    });
    return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

}  // namespace khypo
