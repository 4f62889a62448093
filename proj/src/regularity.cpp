#include "khypo/regularity.hpp"

#include "khypo/quadrature.hpp"
#include "khypo/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace khypo {

namespace {

double rel_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double symbol_at(const CoefficientPath& path, double s, double eta) {
    Vec e(1);
    e(0) = eta;
    return path.kernel(path.piece_at(s))(e);
}

SpectralField x_part(const SpectralField& u, double alpha) {
    const double e = alpha / (1.0 + alpha);
    return map_field(u, [e](double, double xi, double, cplx val) { return std::pow(std::abs(xi), e) * val; });
}

SpectralField v_part(const SpectralField& u, double alpha) {
    return map_field(u, [alpha](double, double, double eta, cplx val) { return std::pow(std::abs(eta), alpha) * val; });
}

std::pair<double, double> shear_range(const CoefficientPath& path, double s, double ta, double tb) {
    if (s >= tb) return {0.0, 0.0};
    std::vector<double> ts{std::max(s, ta), tb};
    for (double b : path.breakpoints())
        if (b > ts[0] && b < tb) ts.push_back(b);
    double lo = INFINITY, hi = -INFINITY;
    for (double t : ts) {
        const double p = path.flow(s, t)(0, 0);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    return {lo, hi};
}

// Σ_slices w_s Σ_cells |g|^p · cell for every p, with each slice sampled on its own lattice in
// sheared coordinates y = x + Π_c v (measure preserving), so the box hugs the slice's support.
struct PhysNorms {
    std::vector<double> ux, uv, f;
};

PhysNorms physical_norms(const CoefficientPath& path, const Source& src, const SpectralField& u,
                         const std::vector<double>& ps, const RegularityOptions& opt, double oversample) {
    const double alpha = path.alpha();
    const auto [ta, tb] = src.window();
    double wxi = INFINITY, weta = INFINITY;
    for (const auto& l : u.lobes) {
        wxi = std::min(wxi, l.width_xi(0));
        weta = std::min(weta, l.width_eta(0));
    }
    const double X0 = opt.grid_margin / wxi, V = opt.grid_margin / weta;
    const std::size_t ns = u.slices.size(), np = ps.size();
    // per slice, per p: three sums
    std::vector<double> sx(ns * np), sv(ns * np), sf(ns * np);
    parallel_for(ns, [&](std::size_t k) {
        const FieldSlice& sl = u.slices[k];
        const auto [pmin, pmax] = shear_range(path, sl.s, ta, tb);
        const double pc = 0.5 * (pmin + pmax), Y = X0 + 0.5 * (pmax - pmin) * V;
        SpectralField one;
        one.dim = 1;
        one.lobes = u.lobes;
        one.slices.push_back(sl);
        // multipliers act on the original η; the shear only relabels nodes afterwards
        SpectralField sx_f = x_part(one, alpha), sv_f = v_part(one, alpha);
        double xmax = 0.0, emax = 0.0;
        for (SpectralField* fld : {&sx_f, &sv_f}) {
            FieldSlice& sh = fld->slices.front();
            for (std::size_t i = 0; i < sh.rows(); ++i) {
                xmax = std::max(xmax, std::abs(sh.xi[i]));
                for (std::size_t q = sh.row[i]; q < sh.row[i + 1]; ++q) {
                    sh.eta[q] -= pc * sh.xi[i];
                    emax = std::max(emax, std::abs(sh.eta[q]));
                }
            }
        }
        const double dy = kPi / (oversample * std::max(xmax, 1e-300));
        const double dv = kPi / (oversample * std::max(emax, 1e-300));
        const auto ny = static_cast<std::size_t>(std::ceil(2.0 * Y / dy)) + 1;
        const auto nv = static_cast<std::size_t>(std::ceil(2.0 * V / dv)) + 1;
        const double hy = 0.5 * (ny - 1) * dy, hv = 0.5 * (nv - 1) * dv;
        const PhysGrid g = uniform_grid(-hy, hy, ny, -hv, hv, nv);
        const PhysField px = inverse_transform_grid(sx_f, g);
        const PhysField pv = inverse_transform_grid(sv_f, g);
        std::vector<double> fv(ny * nv);
        Vec x(1), v(1);
        for (std::size_t i = 0; i < ny; ++i)
            for (std::size_t j = 0; j < nv; ++j) {
                v(0) = g.v[j];
                x(0) = g.x[i] - pc * g.v[j];
                fv[i * nv + j] = src.value(sl.s, x, v);
            }
        const double cell = g.cell_volume();
        std::vector<double> a(ny * nv);
        for (std::size_t m = 0; m < np; ++m) {
            const double p = ps[m];
            auto sum = [&](const std::vector<double>& vals) {
                for (std::size_t q = 0; q < vals.size(); ++q) a[q] = std::pow(std::abs(vals[q]), p);
                return sl.weight * cell * pairwise_sum(a);
            };
            sx[k * np + m] = sum(px.values);
            sv[k * np + m] = sum(pv.values);
            sf[k * np + m] = sum(fv);
        }
    });
    PhysNorms out;
    std::vector<double> col(ns);
    auto total = [&](const std::vector<double>& S, std::size_t m) {
        for (std::size_t k = 0; k < ns; ++k) col[k] = S[k * np + m];
        return std::pow(pairwise_sum(col), 1.0 / ps[m]);
    };
    for (std::size_t m = 0; m < np; ++m) {
        out.ux.push_back(total(sx, m));
        out.uv.push_back(total(sv, m));
        out.f.push_back(total(sf, m));
    }
    return out;
}

struct Norms {
    double f = 0.0, ux = 0.0, uv = 0.0, plancherel = kNaN;
};

// norms for every p from one resolvent field; the physical grid is used for p != 2 (and p = 2 when checking)
std::vector<Norms> norms_for(const CoefficientPath& path, const Source& src, const SpectralField& u,
                             const std::vector<double>& ps, const RegularityOptions& opt, double oversample,
                             bool grid_check) {
    const double alpha = path.alpha();
    const double ux2 = frac_norm_l2(u, alpha / (2.0 * (1.0 + alpha)), 0.0);
    const double uv2 = frac_norm_l2(u, 0.0, alpha / 2.0);
    const double f2 = src.l2_norm();
    std::vector<double> phys_ps;
    for (double p : ps)
        if (p != 2.0 || grid_check) phys_ps.push_back(p);
    PhysNorms pn;
    if (!phys_ps.empty()) pn = physical_norms(path, src, u, phys_ps, opt, oversample);
    std::vector<Norms> out;
    for (double p : ps) {
        Norms n;
        const auto it = std::find(phys_ps.begin(), phys_ps.end(), p);
        if (p == 2.0) {
            n.f = f2;
            n.ux = ux2;
            n.uv = uv2;
            if (it != phys_ps.end()) {
                const std::size_t m = static_cast<std::size_t>(it - phys_ps.begin());
                n.plancherel = std::max({rel_change(pn.ux[m], ux2), rel_change(pn.uv[m], uv2), rel_change(pn.f[m], f2)});
            }
        } else {
            const std::size_t m = static_cast<std::size_t>(it - phys_ps.begin());
            n.f = pn.f[m];
            n.ux = pn.ux[m];
            n.uv = pn.uv[m];
        }
        out.push_back(n);
    }
    return out;
}

}  // namespace

namespace {
BouchutRow bouchut_pair(const CoefficientPath& path, const Source& src, double lambda, const SpectralField& u,
                        const SpectralField* fine);
}

void check_regularity_preconditions(const CoefficientPath& path) {
    const char* where = "harness_cli.run_regularity";
    for (std::size_t k = 0; k < path.pieces(); ++k) {
        if (!check_nondegenerate(path.nu(k)).is_nondegenerate)
            throw DegeneracyError(std::string(where) + ": Lévy measure of piece " + std::to_string(k) +
                                  " is degenerate");
    }
    if (!path.envelopes()) throw ConfigError(std::string(where) + ": envelopes nu1/nu2 are required");
    if (!path.check_sandwich())
        throw DegeneracyError(std::string(where) + ": envelopes do not sandwich the path's measures");
}

RegularityReport run_regularity(const CoefficientPath& path, const Source& src, const std::vector<double>& lambdas,
                                const std::vector<double>& p_values, const FieldGridSpec& grid,
                                const RegularityOptions& opt) {
    const char* where = "harness_cli.run_regularity";
    require(!lambdas.empty(), where, "at least one lambda is required");
    require(!p_values.empty(), where, "at least one p is required");
    for (double l : lambdas) require(l > 0.0 && std::isfinite(l), where, "lambdas must be positive");
    for (double p : p_values) require(p > 1.0 && std::isfinite(p), where, "p must lie in (1, inf)");
    require(path.dim() == 1 && src.dim() == 1, where, "the regularity pipeline is implemented for d = 1");
    check_regularity_preconditions(path);

    RegularityReport rep;
    rep.alpha = path.alpha();
    FieldGridSpec fine = grid;
    fine.refine *= opt.refine_factor;
    std::vector<RegularityRow> rows;
    for (double lambda : lambdas) {
        const SpectralField u = resolvent_field(path, src, lambda, grid);
        const auto n = norms_for(path, src, u, p_values, opt, opt.grid_oversample, opt.grid_check);
        std::vector<Norms> m;
        SpectralField uf;
        if (opt.refine_check) {
            uf = resolvent_field(path, src, lambda, fine);
            m = norms_for(path, src, uf, p_values, opt, opt.grid_oversample * opt.refine_factor, false);
        }
        if (opt.bouchut) rep.bouchut.push_back(bouchut_pair(path, src, lambda, u, opt.refine_check ? &uf : nullptr));
        for (std::size_t j = 0; j < p_values.size(); ++j) {
            RegularityRow row;
            row.lambda = lambda;
            row.p = p_values[j];
            row.f_norm = n[j].f;
            row.ux_norm = n[j].ux;
            row.uv_norm = n[j].uv;
            row.plancherel = n[j].plancherel;
            row.nodes = static_cast<double>(u.node_count());
            if (!(n[j].f > 0.0)) fail_invalid(where, "source norm vanishes");
            row.R1 = n[j].ux / n[j].f;
            row.R2 = n[j].uv / n[j].f;
            if (!std::isfinite(row.R1) || !std::isfinite(row.R2))
                throw AccuracyError(std::string(where) + ": non-finite ratio at lambda " + std::to_string(lambda));
            if (opt.refine_check) {
                row.R1_refined = m[j].ux / m[j].f;
                row.R2_refined = m[j].uv / m[j].f;
                row.delta_R1 = rel_change(row.R1, row.R1_refined);
                row.delta_R2 = rel_change(row.R2, row.R2_refined);
            }
            rows.push_back(row);
        }
    }
    // rows grouped by p, then λ
    for (double p : p_values) {
        double lo1 = INFINITY, hi1 = 0.0, lo2 = INFINITY, hi2 = 0.0;
        for (const auto& r : rows) {
            if (r.p != p) continue;
            rep.rows.push_back(r);
            lo1 = std::min(lo1, r.R1);
            hi1 = std::max(hi1, r.R1);
            lo2 = std::min(lo2, r.R2);
            hi2 = std::max(hi2, r.R2);
        }
        rep.spreads.push_back({p, hi1 / lo1, hi2 / lo2});
    }
    return rep;
}

RegularityReport run_regularity(const ExperimentConfig& cfg, const RegularityOptions& opt) {
    require_path(cfg, true);
    const GaussianPacket src(cfg.source);
    return run_regularity(cfg.path, src, cfg.lambdas, cfg.p_values, cfg.grid, opt);
}

namespace {

// fills the norms of `row`; returns the slack (NaN for a zero field)
double bouchut_slack(const CoefficientPath& path, const Source& src, double lambda, const SpectralField& u,
                     BouchutRow& row) {
    const double alpha = path.alpha();
    const SpectralField f = source_field_like(src, u);
    const SpectralField lu = map_field(u, [&](double s, double, double eta, cplx val) {
        return (symbol_at(path, s, eta) + lambda) * val;
    });
    const SpectralField feff = combine(f, 1.0, lu, -1.0);
    row.ux_norm = frac_norm_l2(u, alpha / (2.0 * (1.0 + alpha)), 0.0);
    row.uv_norm = frac_norm_l2(u, 0.0, alpha / 2.0);
    row.feff_norm = frac_norm_l2(feff, 0.0, 0.0);
    if (row.ux_norm == 0.0 || frac_norm_l2(u, 0.0, 0.0) == 0.0) {
        row.zero_field = true;
        return kNaN;
    }
    const double rhs = std::pow(row.uv_norm, 1.0 / (1.0 + alpha)) * std::pow(row.feff_norm, alpha / (1.0 + alpha));
    row.slack_negative = rhs / frac_norm_l2(u, alpha / 2.0, 0.0);
    return rhs / row.ux_norm;
}

BouchutRow bouchut_pair(const CoefficientPath& path, const Source& src, double lambda, const SpectralField& u,
                        const SpectralField* fine) {
    BouchutRow row;
    row.lambda = lambda;
    row.slack = bouchut_slack(path, src, lambda, u, row);
    if (fine && !row.zero_field) {
        BouchutRow r2 = row;
        row.slack_refined = bouchut_slack(path, src, lambda, *fine, r2);
        row.delta = rel_change(row.slack, row.slack_refined);
    }
    return row;
}

}  // namespace

std::vector<BouchutRow> bouchut_check(const CoefficientPath& path, const Source& src,
                                      const std::vector<double>& lambdas, const FieldGridSpec& grid,
                                      bool refine_check, double refine_factor) {
    require(path.dim() == 1 && src.dim() == 1, "harness_cli.bouchut_check", "implemented for d = 1");
    FieldGridSpec fine = grid;
    fine.refine *= refine_factor;
    std::vector<BouchutRow> out;
    for (double lambda : lambdas) {
        const SpectralField u = resolvent_field(path, src, lambda, grid);
        if (refine_check) {
            const SpectralField uf = resolvent_field(path, src, lambda, fine);
            out.push_back(bouchut_pair(path, src, lambda, u, &uf));
        } else {
            out.push_back(bouchut_pair(path, src, lambda, u, nullptr));
        }
    }
    return out;
}

std::vector<BouchutRow> bouchut_check(const ExperimentConfig& cfg, bool refine_check) {
    require_path(cfg, true);
    const GaussianPacket src(cfg.source);
    return bouchut_check(cfg.path, src, cfg.lambdas, cfg.grid, refine_check);
}

ScalingIdentityResult scaling_identity_check(const CoefficientPath& path, const GaussianPacket& src,
                                             const ScalingIdentitySpec& spec, const FieldGridSpec& grid) {
    const char* where = "harness_cli.scaling_identity_check";
    require(path.dim() == 1, where, "implemented for d = 1");
    require(spec.r > 0.0 && spec.lambda > 0.0, where, "r and lambda must be positive");
    require(spec.which == 1 || spec.which == 2, where, "operator index must be 1 or 2");
    require(spec.nodes >= 2, where, "need at least two nodes per axis");
    const double alpha = path.alpha();
    const double ra = std::pow(spec.r, alpha), r1a = std::pow(spec.r, 1.0 + alpha);

    // τ panels on (-1,1) split where the original path switches pieces
    std::vector<double> cuts{-1.0};
    for (double b : path.breakpoints()) {
        const double tau = (b - spec.t0) / ra;
        if (tau > -1.0 + 1e-12 && tau < 1.0 - 1e-12) cuts.push_back(tau);
    }
    cuts.push_back(1.0);
    std::vector<double> tau, tau_w;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const auto rule = quad::composite_gl(cuts[k], cuts[k + 1], 1, spec.nodes);
        tau.insert(tau.end(), rule.x.begin(), rule.x.end());
        tau_w.insert(tau_w.end(), rule.w.begin(), rule.w.end());
    }
    const auto unit = quad::composite_gl(-1.0, 1.0, 1, spec.nodes);

    auto mult = [&](const SpectralField& u) {
        return spec.which == 1 ? x_part(u, alpha) : v_part(u, alpha);
    };
    // values[k][i*n + j] at (τ_k, ξ_i, ζ_j)
    auto side = [&](const CoefficientPath& p, const Source& s, double lambda, bool original) {
        std::vector<double> times;
        for (double t : tau) times.push_back(original ? spec.t0 + ra * t : t);
        const SpectralField P = mult(resolvent_snapshots(p, s, lambda, times, grid));
        std::vector<std::vector<double>> vals(times.size());
        parallel_for(times.size(), [&](std::size_t k) {
            std::vector<double> xs, vs;
            const double shift = original ? flow_matrix(p, spec.t0, times[k])(0, 0) * spec.v0 : 0.0;
            for (double e : unit.x) {
                xs.push_back(original ? spec.x0 + shift + r1a * e : e);
                vs.push_back(original ? spec.v0 + spec.r * e : e);
            }
            vals[k] = inverse_transform_points(P.slices[k], xs, vs);
        });
        return vals;
    };
    const auto A = side(path, src, spec.lambda, true);
    const CoefficientPath pb = time_rescale(path, spec.r, spec.t0);
    Vec x0(1), v0(1);
    x0(0) = spec.x0;
    v0(0) = spec.v0;
    const RescaledSource sb(std::make_shared<GaussianPacket>(src), path, spec.r, spec.t0, x0, v0);
    const auto B = side(pb, sb, spec.unscaled_lambda ? spec.lambda : ra * spec.lambda, false);

    const std::size_t n = unit.x.size();
    auto average = [&](const std::vector<std::vector<double>>& V, double a, bool square) {
        std::vector<double> terms;
        std::vector<double> wsum;
        for (std::size_t k = 0; k < V.size(); ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double w = tau_w[k] * unit.w[i] * unit.w[j];
                    const double d = V[k][i * n + j] - a;
                    terms.push_back(w * (square ? d * d : d));
                    wsum.push_back(w);
                }
        return pairwise_sum(terms) / pairwise_sum(wsum);
    };
    ScalingIdentityResult res;
    res.a = spec.subtract_mean ? average(A, 0.0, false) : spec.a;
    res.lhs = average(A, res.a, true);
    res.rhs = average(B, res.a, true);
    res.rel_error = std::abs(res.lhs - res.rhs) / std::max(std::abs(res.lhs), 1e-300);
    return res;
}

}  // namespace khypo
