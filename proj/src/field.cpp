#include "khypo/field.hpp"

#include "khypo/quadrature.hpp"
#include "khypo/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace khypo {

namespace {

struct Interval {
    double a, b;
};

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& l, const Interval& r) { return l.a < r.a; });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.a <= out.back().b)
            out.back().b = std::max(out.back().b, iv.b);
        else
            out.push_back(iv);
    }
    return out;
}

void panelize(const std::vector<Interval>& ivs, double width, const FieldGridSpec& spec, std::vector<double>& x,
              std::vector<double>& w) {
    const auto& gl = quad::gauss_legendre_cached(spec.freq_nodes);
    const double pw = spec.freq_panel_width * width / spec.refine;
    for (const auto& iv : ivs) {
        const int n = std::max(1, static_cast<int>(std::ceil((iv.b - iv.a) / pw - 1e-9)));
        const double h = (iv.b - iv.a) / n;
        for (int p = 0; p < n; ++p) {
            const double c = iv.a + (p + 0.5) * h;
            for (std::size_t i = 0; i < gl.size(); ++i) {
                x.push_back(c + 0.5 * h * gl.x[i]);
                w.push_back(0.5 * h * gl.w[i]);
            }
        }
    }
}

// Forces exact mirror symmetry x_i = -x_{N-1-i} on an axis that is symmetric up to rounding.
void symmetrize_axis(std::vector<double>& x, std::vector<double>& w) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double scale = 1.0 + std::abs(x[i]) + std::abs(x[j]);
        if (std::abs(x[i] + x[j]) > 1e-9 * scale || std::abs(w[i] - w[j]) > 1e-9 * (w[i] + w[j]))
            throw ConsistencyError("kinetic_semigroup.field: frequency layout is not mirror symmetric");
        const double m = 0.5 * (x[j] - x[i]), ww = 0.5 * (w[i] + w[j]);
        x[i] = -m;
        x[j] = m;
        w[i] = w[j] = ww;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

double min_width(const std::vector<Lobe>& lobes, bool xi_axis) {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& l : lobes) w = std::min(w, xi_axis ? l.width_xi(0) : l.width_eta(0));
    return w;
}

}  // namespace

FieldSlice make_layout(const std::vector<Lobe>& lobes, double pmin, double pmax, const FieldGridSpec& spec) {
    const double H = spec.freq_half_width;
    FieldSlice sl;
    std::vector<Interval> xiv;
    for (const auto& l : lobes) xiv.push_back({l.center_xi(0) - H * l.width_xi(0), l.center_xi(0) + H * l.width_xi(0)});
    panelize(merge_intervals(xiv), min_width(lobes, true), spec, sl.xi, sl.xi_w);
    symmetrize_axis(sl.xi, sl.xi_w);
    const std::size_t n = sl.xi.size();
    const double weta = min_width(lobes, false);
    std::vector<std::vector<double>> re(n), rw(n);
    for (std::size_t i = n / 2; i < n; ++i) {
        const double xi = sl.xi[i];
        std::vector<Interval> ivs;
        for (const auto& l : lobes) {
            if (std::abs(xi - l.center_xi(0)) > H * l.width_xi(0) * (1.0 + 1e-12)) continue;
            const double a = std::min(pmin * xi, pmax * xi), b = std::max(pmin * xi, pmax * xi);
            ivs.push_back({l.center_eta(0) + a - H * l.width_eta(0), l.center_eta(0) + b + H * l.width_eta(0)});
        }
        panelize(merge_intervals(ivs), weta, spec, re[i], rw[i]);
    }
    if (n % 2 == 1) symmetrize_axis(re[n / 2], rw[n / 2]);
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        re[i].assign(re[j].rbegin(), re[j].rend());
        for (double& e : re[i]) e = -e;
        rw[i].assign(rw[j].rbegin(), rw[j].rend());
    }
    sl.row.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        sl.eta.insert(sl.eta.end(), re[i].begin(), re[i].end());
        sl.eta_w.insert(sl.eta_w.end(), rw[i].begin(), rw[i].end());
        sl.row.push_back(sl.eta.size());
    }
    sl.val.assign(sl.eta.size(), cplx(0.0, 0.0));
    return sl;
}

void fill_slice(FieldSlice& sl, const std::function<cplx(double, double)>& value) {
    const std::size_t n = sl.rows();
    const std::size_t first = n / 2;
    parallel_for(n - first, [&](std::size_t r) {
        const std::size_t i = first + r;
        const std::size_t b = sl.row[i], e = sl.row[i + 1], m = e - b;
        const bool middle = (n % 2 == 1) && i == n / 2;
        for (std::size_t k = middle ? m / 2 : 0; k < m; ++k) sl.val[b + k] = value(sl.xi[i], sl.eta[b + k]);
        if (middle)
            for (std::size_t k = 0; k < m / 2; ++k) sl.val[b + k] = std::conj(sl.val[b + m - 1 - k]);
    });
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const std::size_t bi = sl.row[i], bj = sl.row[j], m = sl.row[j + 1] - bj;
        for (std::size_t k = 0; k < m; ++k) sl.val[bi + k] = std::conj(sl.val[bj + m - 1 - k]);
    }
}

namespace {

void require_d1(int d, const char* where) {
    if (d != 1) fail_invalid(where, "spectral fields are implemented for d = 1");
}

double slice_energy(const FieldSlice& sl) {
    std::vector<double> rows(sl.rows());
    for (std::size_t i = 0; i < sl.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k) s += sl.eta_w[k] * std::norm(sl.val[k]);
        rows[i] = sl.xi_w[i] * s;
    }
    return pairwise_sum(rows);
}

// Range of Π_{s,t} over t in [lo, hi].
std::pair<double, double> flow_range(const CoefficientPath& path, double s, double lo, double hi) {
    std::vector<double> ts{lo, hi};
    for (double b : path.breakpoints())
        if (b > lo && b < hi) ts.push_back(b);
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (double t : ts) {
        const double p = path.flow(s, t)(0, 0);
        mn = std::min(mn, p);
        mx = std::max(mx, p);
    }
    return {mn, mx};
}

double peak_weight(const std::vector<Lobe>& lobes) {
    double m = 0.0;
    for (const auto& l : lobes) m = std::max(m, l.weight);
    return m;
}

}  // namespace

std::size_t SpectralField::node_count() const {
    std::size_t n = 0;
    for (const auto& s : slices) n += s.val.size();
    return n;
}

SpectralField source_field(const Source& src, double t, const FieldGridSpec& spec) {
    require_d1(src.dim(), "kinetic_semigroup.source_field");
    SpectralField f;
    f.lobes = src.lobes();
    FieldSlice sl = make_layout(f.lobes, 0.0, 0.0, spec);
    sl.s = t;
    fill_slice(sl, [&](double xi, double eta) {
        Vec xv(1), ev(1);
        xv(0) = xi;
        ev(0) = eta;
        return src.hat(t, xv, ev);
    });
    f.slices.push_back(std::move(sl));
    return f;
}

SpectralField source_field_like(const Source& src, const SpectralField& layout) {
    require_d1(src.dim(), "kinetic_semigroup.source_field_like");
    SpectralField f = layout;
    f.lambda = 0.0;
    for (auto& sl : f.slices) {
        const double s = sl.s;
        fill_slice(sl, [&](double xi, double eta) {
            Vec xv(1), ev(1);
            xv(0) = xi;
            ev(0) = eta;
            return src.hat(s, xv, ev);
        });
    }
    return f;
}

static FieldSlice resolvent_slice(const CoefficientPath& path, const ResolventEvaluator& ev,
                                  const std::vector<Lobe>& lobes, double s, double w, double t_a, double t_b,
                                  const FieldGridSpec& spec, double& shear_max) {
    const auto [pmin, pmax] = s < t_b ? flow_range(path, s, std::max(s, t_a), t_b) : std::pair{0.0, 0.0};
    shear_max = std::max({shear_max, std::abs(pmin), std::abs(pmax)});
    FieldSlice sl = make_layout(lobes, pmin, pmax, spec);
    sl.s = s;
    sl.weight = w;
    fill_slice(sl, [&](double xi, double eta) {
        Vec xv(1), e(1);
        xv(0) = xi;
        e(0) = eta;
        return ev(s, xv, e);
    });
    return sl;
}

static double abs_floor(const Source& src, const FieldGridSpec& spec) {
    const auto [a, b] = src.window();
    return spec.resolvent_tol * 1e-4 * peak_weight(src.lobes()) * (b - a);
}

SpectralField resolvent_field(const CoefficientPath& path, const Source& src, double lambda,
                              const FieldGridSpec& spec) {
    const char* where = "kinetic_semigroup.resolvent_field";
    require_d1(src.dim(), where);
    require(path.dim() == 1, where, "path dimension must be 1");
    require(spec.refine > 0.0, where, "refine must be positive");
    ResolventEvaluator ev(path, src, lambda, spec.resolvent_tol, abs_floor(src, spec));
    const auto [ta, tb] = src.window();
    const double W = tb - ta;
    SpectralField f;
    f.lambda = lambda;
    f.integrated = true;
    f.lobes = src.lobes();
    const auto& gl = quad::gauss_legendre_cached(spec.time_nodes);
    const int sub = std::max(1, static_cast<int>(std::ceil(spec.refine - 1e-9)));
    auto add_panel = [&](double a, double b) {
        double energy = 0.0;
        const double h = (b - a) / sub;
        for (int p = 0; p < sub; ++p) {
            const double c = a + (p + 0.5) * h;
            for (std::size_t i = 0; i < gl.size(); ++i) {
                const double s = c + 0.5 * h * gl.x[i], w = 0.5 * h * gl.w[i];
                f.slices.push_back(resolvent_slice(path, ev, f.lobes, s, w, ta, tb, spec, f.shear_max));
                energy += w * slice_energy(f.slices.back());
            }
        }
        return energy;
    };
    const int nw = std::max(1, spec.window_panels);
    double total = 0.0;
    for (int p = 0; p < nw; ++p) total += add_panel(ta + W * p / nw, ta + W * (p + 1) / nw);
    double prev = 0.0, L = spec.pre_window_first * W;
    while (true) {
        const double e = add_panel(ta - L, ta - prev);
        total += e;
        if (e <= spec.tail_tol * total || L >= spec.pre_window_max * W) break;
        prev = L;
        L *= 2.0;
    }
    std::sort(f.slices.begin(), f.slices.end(), [](const FieldSlice& a, const FieldSlice& b) { return a.s < b.s; });
    return f;
}

SpectralField resolvent_snapshots(const CoefficientPath& path, const Source& src, double lambda,
                                  const std::vector<double>& times, const FieldGridSpec& spec) {
    require_d1(src.dim(), "kinetic_semigroup.resolvent_snapshots");
    ResolventEvaluator ev(path, src, lambda, spec.resolvent_tol, abs_floor(src, spec));
    const auto [ta, tb] = src.window();
    SpectralField f;
    f.lambda = lambda;
    f.lobes = src.lobes();
    for (double s : times) f.slices.push_back(resolvent_slice(path, ev, f.lobes, s, 1.0, ta, tb, spec, f.shear_max));
    return f;
}

SpectralField semigroup_field(const CoefficientPath& path, const Source& src, double tf, double s, double t,
                              const FieldGridSpec& spec) {
    require_d1(src.dim(), "kinetic_semigroup.semigroup_field");
    if (s > t) fail_invalid("kinetic_semigroup.semigroup_field", "requires s <= t");
    const double p = path.flow(s, t)(0, 0);
    SpectralField f;
    f.lobes = src.lobes();
    f.shear_max = std::abs(p);
    FieldSlice sl = make_layout(f.lobes, p, p, spec);
    sl.s = s;
    const FourierFn fh = [&](const Vec& xi, const Vec& eta) { return src.hat(tf, xi, eta); };
    fill_slice(sl, [&](double xi, double eta) {
        Vec xv(1), ev(1);
        xv(0) = xi;
        ev(0) = eta;
        return apply_semigroup_hat(path, fh, s, t, xv, ev);
    });
    f.slices.push_back(std::move(sl));
    return f;
}

SpectralField map_field(const SpectralField& f, const Multiplier& m) {
    SpectralField g = f;
    for (auto& sl : g.slices)
        for (std::size_t i = 0; i < sl.rows(); ++i)
            for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k) sl.val[k] = m(sl.s, sl.xi[i], sl.eta[k], sl.val[k]);
    return g;
}

SpectralField combine(const SpectralField& f, double a, const SpectralField& g, double b) {
    require(f.slices.size() == g.slices.size(), "kinetic_semigroup.combine", "layouts differ");
    SpectralField h = f;
    for (std::size_t k = 0; k < h.slices.size(); ++k) {
        auto& hs = h.slices[k];
        const auto& gs = g.slices[k];
        require(hs.val.size() == gs.val.size() && hs.s == gs.s, "kinetic_semigroup.combine", "layouts differ");
        for (std::size_t j = 0; j < hs.val.size(); ++j) hs.val[j] = a * hs.val[j] + b * gs.val[j];
    }
    return h;
}

double frac_norm_l2(const SpectralField& f, double beta_x, double beta_v) {
    if (f.empty()) fail_invalid("kinetic_semigroup.frac_norm_l2", "field is empty");
    require(beta_x >= 0.0 && beta_v >= 0.0, "kinetic_semigroup.frac_norm_l2", "orders must be nonnegative");
    std::vector<double> per_slice;
    for (const auto& sl : f.slices) {
        std::vector<double> rows(sl.rows());
        for (std::size_t i = 0; i < sl.rows(); ++i) {
            double s = 0.0;
            for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k) {
                double m = std::norm(sl.val[k]);
                if (beta_v > 0.0) m *= std::pow(std::abs(sl.eta[k]), 4.0 * beta_v);
                s += sl.eta_w[k] * m;
            }
            rows[i] = sl.xi_w[i] * s * (beta_x > 0.0 ? std::pow(std::abs(sl.xi[i]), 4.0 * beta_x) : 1.0);
        }
        per_slice.push_back(sl.weight * pairwise_sum(rows));
    }
    const double total = pairwise_sum(per_slice) / std::pow(2.0 * kPi, 2.0 * f.dim);
    return std::sqrt(std::max(total, 0.0));
}

double hermitian_defect(const SpectralField& f) {
    double worst = 0.0;
    for (const auto& sl : f.slices) {
        const std::size_t n = sl.rows();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = n - 1 - i;
            const std::size_t bi = sl.row[i], bj = sl.row[j], m = sl.row[i + 1] - bi;
            if (sl.row[j + 1] - bj != m || sl.xi[i] != -sl.xi[j]) return std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < m; ++k) {
                if (sl.eta[bi + k] != -sl.eta[bj + m - 1 - k]) return std::numeric_limits<double>::infinity();
                worst = std::max(worst, std::abs(sl.val[bi + k] - std::conj(sl.val[bj + m - 1 - k])));
            }
        }
    }
    return worst;
}

// ---- physical space ----------------------------------------------------------

double PhysGrid::cell_volume() const {
    const double dx = x.size() > 1 ? x[1] - x[0] : 1.0;
    const double dv = v.size() > 1 ? v[1] - v[0] : 1.0;
    return dx * dv;
}

PhysGrid uniform_grid(double x0, double x1, std::size_t nx, double v0, double v1, std::size_t nv) {
    require(nx >= 2 && nv >= 2 && x1 > x0 && v1 > v0, "kinetic_semigroup.uniform_grid", "invalid lattice");
    PhysGrid g;
    for (std::size_t i = 0; i < nx; ++i) g.x.push_back(x0 + (x1 - x0) * static_cast<double>(i) / (nx - 1));
    for (std::size_t j = 0; j < nv; ++j) g.v.push_back(v0 + (v1 - v0) * static_cast<double>(j) / (nv - 1));
    return g;
}

PhysGrid auto_phys_grid(const SpectralField& f, double margin, double oversample) {
    require(!f.empty(), "kinetic_semigroup.auto_phys_grid", "field is empty");
    const double V = margin / min_width(f.lobes, false);
    const double X = margin / min_width(f.lobes, true) + f.shear_max * V;
    double xmax = 0.0, emax = 0.0;
    for (const auto& sl : f.slices) {
        for (double x : sl.xi) xmax = std::max(xmax, std::abs(x));
        for (double e : sl.eta) emax = std::max(emax, std::abs(e));
    }
    const double dx = kPi / (oversample * std::max(xmax, 1e-300));
    const double dv = kPi / (oversample * std::max(emax, 1e-300));
    const auto nx = static_cast<std::size_t>(std::ceil(2.0 * X / dx)) + 1;
    const auto nv = static_cast<std::size_t>(std::ceil(2.0 * V / dv)) + 1;
    const double hx = 0.5 * (nx - 1) * dx, hv = 0.5 * (nv - 1) * dv;
    return uniform_grid(-hx, hx, nx, -hv, hv, nv);
}

PhysField inverse_transform_grid(const SpectralField& f, const PhysGrid& grid) {
    const char* where = "kinetic_semigroup.inverse_transform_grid";
    require_d1(f.dim, where);
    const std::size_t nx = grid.x.size(), nv = grid.v.size();
    require(nx >= 1 && nv >= 1, where, "empty grid");
    PhysField out;
    out.nx = nx;
    out.nv = nv;
    out.cell_volume = grid.cell_volume();
    out.values.assign(f.slices.size() * nx * nv, 0.0);
    for (const auto& sl : f.slices) out.slice_weight.push_back(sl.weight);
    const double dx = nx > 1 ? grid.x[1] - grid.x[0] : 0.0, dv = nv > 1 ? grid.v[1] - grid.v[0] : 0.0;
    const double norm = 1.0 / std::pow(2.0 * kPi, 2.0);
    std::vector<double> re_max(f.slices.size(), 0.0), im_max(f.slices.size(), 0.0);
    parallel_for(f.slices.size(), [&](std::size_t s) {
        const auto& sl = f.slices[s];
        std::vector<cplx> acc(nx * nv, cplx(0.0, 0.0)), g(nv), zx(nx);
        for (std::size_t i = 0; i < sl.rows(); ++i) {
            std::fill(g.begin(), g.end(), cplx(0.0, 0.0));
            for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k) {
                cplx z = sl.eta_w[k] * sl.val[k] * std::polar(1.0, -grid.v[0] * sl.eta[k]);
                const cplx r = std::polar(1.0, -dv * sl.eta[k]);
                for (std::size_t j = 0; j < nv; ++j) {
                    g[j] += z;
                    z *= r;
                }
            }
            cplx z = sl.xi_w[i] * std::polar(1.0, -grid.x[0] * sl.xi[i]);
            const cplx r = std::polar(1.0, -dx * sl.xi[i]);
            for (std::size_t l = 0; l < nx; ++l) {
                zx[l] = z;
                z *= r;
            }
            for (std::size_t l = 0; l < nx; ++l) {
                cplx* a = &acc[l * nv];
                const cplx c = zx[l];
                for (std::size_t j = 0; j < nv; ++j) a[j] += c * g[j];
            }
        }
        double* dst = &out.values[s * nx * nv];
        for (std::size_t q = 0; q < nx * nv; ++q) {
            dst[q] = norm * acc[q].real();
            re_max[s] = std::max(re_max[s], std::abs(dst[q]));
            im_max[s] = std::max(im_max[s], norm * std::abs(acc[q].imag()));
        }
    });
    const double rm = *std::max_element(re_max.begin(), re_max.end());
    const double im = *std::max_element(im_max.begin(), im_max.end());
    if (im > 1e-8 * rm) {
        std::ostringstream os;
        os << where << ": imaginary residue " << im << " exceeds 1e-8 of the real part " << rm;
        throw ConsistencyError(os.str());
    }
    return out;
}

double eval_point(const FieldSlice& sl, double x, double v) {
    double total = 0.0;
    for (std::size_t i = 0; i < sl.rows(); ++i) {
        cplx s(0.0, 0.0);
        for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k)
            s += sl.eta_w[k] * sl.val[k] * std::polar(1.0, -(x * sl.xi[i] + v * sl.eta[k]));
        total += sl.xi_w[i] * s.real();
    }
    return total / std::pow(2.0 * kPi, 2.0);
}

std::vector<double> inverse_transform_points(const FieldSlice& sl, const std::vector<double>& x,
                                             const std::vector<double>& v) {
    const std::size_t nx = x.size(), nv = v.size();
    std::vector<cplx> acc(nx * nv, cplx(0.0, 0.0)), g(nv);
    for (std::size_t i = 0; i < sl.rows(); ++i) {
        std::fill(g.begin(), g.end(), cplx(0.0, 0.0));
        for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k) {
            const cplx c = sl.eta_w[k] * sl.val[k];
            for (std::size_t j = 0; j < nv; ++j) g[j] += c * std::polar(1.0, -v[j] * sl.eta[k]);
        }
        for (std::size_t l = 0; l < nx; ++l) {
            const cplx z = sl.xi_w[i] * std::polar(1.0, -x[l] * sl.xi[i]);
            for (std::size_t j = 0; j < nv; ++j) acc[l * nv + j] += z * g[j];
        }
    }
    std::vector<double> out(nx * nv);
    const double norm = 1.0 / std::pow(2.0 * kPi, 2.0);
    for (std::size_t q = 0; q < out.size(); ++q) out[q] = norm * acc[q].real();
    return out;
}

double lp_norm(const std::vector<double>& u, double p, double cell_volume) {
    require(p >= 1.0 && std::isfinite(p), "kinetic_semigroup.lp_norm", "p must be finite and >= 1");
    std::vector<double> a(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) a[i] = std::pow(std::abs(u[i]), p);
    return std::pow(pairwise_sum(a) * cell_volume, 1.0 / p);
}

double lp_norm(const PhysField& u, double p) {
    require(p >= 1.0 && std::isfinite(p), "kinetic_semigroup.lp_norm", "p must be finite and >= 1");
    const std::size_t m = u.nx * u.nv;
    std::vector<double> per(u.slice_weight.size()), a(m);
    for (std::size_t s = 0; s < per.size(); ++s) {
        for (std::size_t q = 0; q < m; ++q) a[q] = std::pow(std::abs(u.values[s * m + q]), p);
        per[s] = u.slice_weight[s] * pairwise_sum(a);
    }
    return std::pow(pairwise_sum(per) * u.cell_volume, 1.0 / p);
}

void export_field_csv(const SpectralField& f, std::ostream& os) {
    os << "s,xi,eta,re,im,weight\n";
    char buf[256];
    for (const auto& sl : f.slices)
        for (std::size_t i = 0; i < sl.rows(); ++i)
            for (std::size_t k = sl.row[i]; k < sl.row[i + 1]; ++k) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", sl.s, sl.xi[i], sl.eta[k],
                              sl.val[k].real(), sl.val[k].imag(), sl.weight * sl.xi_w[i] * sl.eta_w[k]);
                os << buf;
            }
}

}  // namespace khypo
