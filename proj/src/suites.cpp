#include "khypo/suites.hpp"

#include "khypo/boltzmann.hpp"
#include "khypo/generator.hpp"
#include "khypo/geometry.hpp"
#include "khypo/monte_carlo.hpp"
#include "khypo/regularity.hpp"
#include "khypo/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace khypo {

namespace {

std::vector<double> list_or(const json& j, const char* key, std::vector<double> def) {
    if (!j.contains(key)) return def;
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw ConfigError(std::string("harness_cli.config: '") + key + "' must list numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

bool flag_or(const json& j, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) throw ConfigError(std::string("harness_cli.config: '") + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

std::string fmt(double v) { return format_number(v); }

double max_finite(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, x);
    return m;
}

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit_symmetric(std::uint64_t& s) { return 2.0 * (static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53) - 1.0; }

// regularity + Bouchut at p = 2 for one path; appends rows tagged with alpha
struct L2Outcome {
    RegularityReport reg;
    std::vector<BouchutRow> bouchut;
};

L2Outcome l2_pipeline(const CoefficientPath& path, const ExperimentConfig& cfg, const json& sec) {
    const GaussianPacket src(cfg.source);
    RegularityOptions opt;
    opt.refine_factor = get_or(sec, "refine_factor", 2.0);
    opt.bouchut = flag_or(sec, "bouchut", true);
    L2Outcome o;
    o.reg = run_regularity(path, src, cfg.lambdas, {2.0}, cfg.grid, opt);
    o.bouchut = o.reg.bouchut;
    return o;
}

Table regularity_table() {
    return {"regularity",
            {"alpha", "lambda", "p", "f_norm", "ux_norm", "uv_norm", "R1", "R2", "R1_refined", "R2_refined",
             "delta_R1", "delta_R2", "plancherel", "nodes"},
            {}};
}

void add_rows(Table& t, const RegularityReport& rep) {
    for (const auto& r : rep.rows)
        t.add({rep.alpha, r.lambda, r.p, r.f_norm, r.ux_norm, r.uv_norm, r.R1, r.R2, r.R1_refined, r.R2_refined,
               r.delta_R1, r.delta_R2, r.plancherel, r.nodes});
}

Table bouchut_table() {
    return {"bouchut",
            {"alpha", "lambda", "zero_field", "ux_norm", "uv_norm", "feff_norm", "slack", "slack_refined", "delta",
             "slack_negative"},
            {}};
}

void add_rows(Table& t, double alpha, const std::vector<BouchutRow>& rows) {
    for (const auto& b : rows)
        t.add({alpha, b.lambda, b.zero_field ? 1.0 : 0.0, b.ux_norm, b.uv_norm, b.feff_norm, b.slack, b.slack_refined,
               b.delta, b.slack_negative});
}

// assertions shared by verify-l2 and sweep
void assert_l2(RunReport& rep, const std::string& tag, const L2Outcome& o, const json& sec) {
    const double refine_tol = get_or(sec, "refine_tol", 0.05);
    const double spread_max = get_or(sec, "spread_max", 2.0);
    const double slack_tol = get_or(sec, "slack_refine_tol", 0.10);
    const double slack_floor = get_or(sec, "slack_floor", 1.0);
    bool finite = true;
    std::vector<double> deltas;
    for (const auto& r : o.reg.rows) {
        finite = finite && std::isfinite(r.R1) && std::isfinite(r.R2) && r.R1 > 0.0 && r.R2 > 0.0;
        deltas.push_back(r.delta_R1);
        deltas.push_back(r.delta_R2);
    }
    rep.check(tag + "ratios_finite", finite, finite ? 1.0 : 0.0, 1.0);
    const double dmax = max_finite(deltas);
    rep.check(tag + "refinement_delta", dmax <= refine_tol, dmax, refine_tol, "max relative change of R1, R2");
    const auto& sp = o.reg.spreads.front();
    rep.check(tag + "lambda_spread_R1", sp.R1 <= spread_max, sp.R1, spread_max, "max/min of R1 over lambda");
    rep.check(tag + "lambda_spread_R2", sp.R2 <= spread_max, sp.R2, spread_max, "max/min of R2 over lambda");
    if (!o.bouchut.empty()) {
        std::vector<double> d;
        double smin = INFINITY;
        for (const auto& b : o.bouchut) {
            if (b.zero_field) continue;
            d.push_back(b.delta);
            smin = std::min({smin, b.slack, b.slack_refined});
        }
        const double bd = max_finite(d);
        rep.check(tag + "bouchut_refinement", bd <= slack_tol, bd, slack_tol, "relative change of the slack");
        rep.check(tag + "bouchut_floor", smin >= slack_floor, smin, slack_floor, "smallest slack");
    }
}

}  // namespace

CoefficientPath with_alpha(const CoefficientPath& path, double alpha) {
    auto conv = [alpha](const StableMeasure& m) {
        return StableMeasure(alpha, m.dim(), m.atoms(), m.iso_weight());
    };
    std::vector<Mat> sig, U;
    std::vector<StableMeasure> nu;
    for (std::size_t k = 0; k < path.pieces(); ++k) {
        sig.push_back(path.sigma(k));
        U.push_back(path.U(k));
        nu.push_back(conv(path.nu(k)));
    }
    std::optional<Envelopes> env;
    if (path.envelopes()) env = Envelopes{conv(path.envelopes()->nu1), conv(path.envelopes()->nu2)};
    return CoefficientPath(path.breakpoints(), std::move(sig), std::move(U), std::move(nu), env);
}

RunReport suite_verify_l2(const ExperimentConfig& cfg) {
    require_path(cfg, true);
    const json sec = section(cfg, "regularity");
    RunReport rep;
    rep.command = "verify-l2";
    const L2Outcome o = l2_pipeline(cfg.path, cfg, sec);
    Table t = regularity_table();
    add_rows(t, o.reg);
    rep.tables.push_back(t);
    Table b = bouchut_table();
    add_rows(b, o.reg.alpha, o.bouchut);
    rep.tables.push_back(b);
    rep.plots.push_back({"regularity.svg", "regularity", "lambda", {"R1", "R2"}});
    assert_l2(rep, "", o, sec);
    for (const auto& x : o.bouchut)
        if (!x.zero_field)
            rep.notes.push_back("negative control lambda=" + fmt(x.lambda) + " slack_alpha_half=" +
                                fmt(x.slack_negative));
    return rep;
}

RunReport suite_verify_lp(const ExperimentConfig& cfg) {
    require_path(cfg, true);
    const json sec = section(cfg, "regularity");
    RunReport rep;
    rep.command = "verify-lp";
    const GaussianPacket src(cfg.source);
    RegularityOptions opt;
    opt.refine_factor = get_or(sec, "refine_factor", 2.0);
    opt.grid_check = true;
    std::vector<double> ps = cfg.p_values;
    if (std::find(ps.begin(), ps.end(), 2.0) == ps.end()) ps.push_back(2.0);
    const RegularityReport r = run_regularity(cfg.path, src, cfg.lambdas, ps, cfg.grid, opt);
    Table t = regularity_table();
    add_rows(t, r);
    rep.tables.push_back(t);
    Table s{"spread", {"alpha", "p", "spread_R1", "spread_R2"}, {}};
    for (const auto& sp : r.spreads) s.add({r.alpha, sp.p, sp.R1, sp.R2});
    rep.tables.push_back(s);
    const double tol = get_or(sec, "lp_refine_tol", 0.10), ptol = get_or(sec, "plancherel_tol", 1e-4);
    bool finite = true;
    std::vector<double> d, pl;
    for (const auto& row : r.rows) {
        finite = finite && std::isfinite(row.R1) && std::isfinite(row.R2) && row.R1 > 0.0 && row.R2 > 0.0;
        if (row.p != 2.0) {
            d.push_back(row.delta_R1);
            d.push_back(row.delta_R2);
        } else {
            pl.push_back(row.plancherel);
        }
    }
    rep.check("ratios_finite", finite, finite ? 1.0 : 0.0, 1.0);
    rep.check("refinement_delta", max_finite(d) <= tol, max_finite(d), tol, "max relative change, p != 2");
    rep.check("plancherel", max_finite(pl) <= ptol, max_finite(pl), ptol, "p = 2 grid norm against spectral norm");
    return rep;
}

RunReport suite_sweep(const ExperimentConfig& cfg) {
    require_path(cfg, true);
    const json sec = section(cfg, "regularity");
    const json sw = section(cfg, "sweep");
    RunReport rep;
    rep.command = "sweep";
    Table t = regularity_table();
    Table b = bouchut_table();
    Table s{"spread", {"alpha", "p", "spread_R1", "spread_R2"}, {}};
    for (double a : list_or(sw, "alphas", {cfg.path.alpha()})) {
        const CoefficientPath p = with_alpha(cfg.path, a);
        const L2Outcome o = l2_pipeline(p, cfg, sec);
        add_rows(t, o.reg);
        add_rows(b, a, o.bouchut);
        for (const auto& sp : o.reg.spreads) s.add({a, sp.p, sp.R1, sp.R2});
        assert_l2(rep, "alpha=" + fmt(a) + ":", o, sec);
    }
    rep.tables.push_back(t);
    rep.tables.push_back(b);
    rep.tables.push_back(s);
    rep.plots.push_back({"regularity.svg", "regularity", "lambda", {"R1", "R2"}});
    return rep;
}

RunReport suite_symbol(const ExperimentConfig& cfg) {
    require_path(cfg);
    const json sec = section(cfg, "symbol");
    RunReport rep;
    rep.command = "symbol";
    const int d = cfg.path.dim();
    const LevySymbol sym = cfg.path.symbol_at(get_or(sec, "time", cfg.path.breakpoints().front()));
    const double alpha = cfg.path.alpha();
    std::vector<Vec> probes;
    if (sec.contains("xi")) {
        for (const auto& x : sec.at("xi")) probes.push_back(vec_from_json(x, "symbol.xi"));
    } else {
        std::uint64_t st = cfg.seed;
        const int n = get_or(sec, "probes", 1000);
        for (int i = 0; i < n; ++i) {
            Vec x(d);
            for (int k = 0; k < d; ++k) x(k) = 4.0 * unit_symmetric(st);
            probes.push_back(x);
        }
    }
    const double scale = get_or(sec, "scale", 2.5);
    std::vector<std::string> cols;
    for (int k = 0; k < d; ++k) cols.push_back("xi" + std::to_string(k + 1));
    for (const char* c : {"psi", "psi_scaled", "homogeneity_error"}) cols.emplace_back(c);
    Table t{"symbol", cols, {}};
    double worst = 0.0;
    for (const auto& x : probes) {
        require(x.size() == d, "harness_cli.symbol", "probe dimension differs from the path");
        const double p = eval_symbol(sym, x), q = eval_symbol(sym, Vec(scale * x));
        const double err = std::abs(q - std::pow(scale, alpha) * p) / std::max(std::abs(q), 1e-300);
        worst = std::max(worst, p == 0.0 && q == 0.0 ? 0.0 : err);
        std::vector<double> row(x.data(), x.data() + d);
        row.insert(row.end(), {p, q, err});
        t.add(row);
    }
    rep.tables.push_back(t);
    const double htol = get_or(sec, "homogeneity_tol", 1e-10);
    rep.check("homogeneity", worst <= htol, worst, htol, "psi(t xi) = t^alpha psi(xi)");
    const double k1 = sym.kappa1();
    rep.check("nondegenerate", k1 > 0.0, k1, 0.0, "kappa1 > 0");

    // backward Kolmogorov residual under step halving
    if (sec.contains("kolmogorov")) {
        require(cfg.has_source, "harness_cli.symbol", "the kolmogorov check needs a source");
        const json& kj = sec.at("kolmogorov");
        const GaussianPacket src(cfg.source);
        const double s0 = get_or(kj, "s", 0.3), t1 = get_or(kj, "t", 1.0), tf = get_or(kj, "tf", 0.5);
        const auto hs = list_or(kj, "h", {0.1, 0.05, 0.025, 0.0125});
        std::vector<std::pair<double, double>> pts;
        if (kj.contains("probes")) {
            for (const auto& q : kj.at("probes")) pts.emplace_back(q.at(0).get<double>(), q.at(1).get<double>());
        } else {
            pts = {{0.0, 0.0}, {0.5, -0.3}, {-1.0, 0.7}};
        }
        KolmogorovSpec ks;
        ks.grid = cfg.grid;
        Table kt{"kolmogorov", {"h", "residual", "order"}, {}};
        std::vector<double> lh, lr;
        double prev = kNaN;
        for (double h : hs) {
            const double res = kolmogorov_residual(cfg.path, src, tf, s0, t1, pts, h, ks);
            kt.add({h, res, std::log2(prev / res)});
            prev = res;
            lh.push_back(std::log(h));
            lr.push_back(std::log(res));
        }
        rep.tables.push_back(kt);
        // least-squares slope of log residual against log h
        const double n = static_cast<double>(lh.size());
        double mh = 0.0, mr = 0.0;
        for (std::size_t i = 0; i < lh.size(); ++i) mh += lh[i] / n, mr += lr[i] / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lh.size(); ++i) sxy += (lh[i] - mh) * (lr[i] - mr), sxx += (lh[i] - mh) * (lh[i] - mh);
        const double order = lh.size() >= 2 ? sxy / sxx : kNaN;
        const double omin = get_or(kj, "min_order", 3.5);
        rep.check("kolmogorov_order", order >= omin, order, omin, "fitted over " + std::to_string(hs.size()) + " steps");
    }
    return rep;
}

RunReport suite_mc_validate(const ExperimentConfig& cfg) {
    require_path(cfg);
    const json sec = section(cfg, "monte_carlo");
    RunReport rep;
    rep.command = "mc-validate";
    const CoefficientPath& path = cfg.path;
    const int d = path.dim();
    const double alpha = path.alpha();
    const double s = get_or(sec, "s", 0.0), t = get_or(sec, "t", 1.0);
    const auto n_paths = static_cast<std::size_t>(get_or(sec, "n_paths", 200000));
    const int n_steps = get_or(sec, "n_steps", 16);
    const int n_probes = get_or(sec, "probes", 30);
    const double pscale = get_or(sec, "probe_scale", 2.0), zmax = get_or(sec, "z_max", 3.5);

    // characteristic function
    const SampleEnsemble e = sample_K(path, s, t, n_paths, n_steps, cfg.seed);
    if (flag_or(sec, "export_ensemble", false)) {
        std::ostringstream os;
        write_ensemble(e, os);
        rep.blobs.emplace_back("ensemble.bin", os.str());
    }
    const double h = t - s;
    std::uint64_t st = cfg.seed ^ 0xc0ffee;
    std::vector<std::string> cols{"probe"};
    for (int k = 0; k < d; ++k) cols.push_back("xi" + std::to_string(k + 1));
    for (int k = 0; k < d; ++k) cols.push_back("eta" + std::to_string(k + 1));
    for (const char* c : {"analytic", "empirical", "std_error", "z"}) cols.emplace_back(c);
    Table ct{"char_function", cols, {}};
    int excursions = 0;
    double zworst = 0.0;
    for (int i = 0; i < n_probes; ++i) {
        Vec xi(d), eta(d);
        for (int k = 0; k < d; ++k) xi(k) = pscale * unit_symmetric(st) / std::pow(h, 1.0 + 1.0 / alpha);
        for (int k = 0; k < d; ++k) eta(k) = pscale * unit_symmetric(st) / std::pow(h, 1.0 / alpha);
        const double a = char_function(path, s, t, xi, eta);
        const CharEstimate m = mc_char(e, xi, eta);
        const double z = std::abs(m.value - a) / m.std_error;
        zworst = std::max(zworst, z);
        if (z > zmax) ++excursions;
        std::vector<double> row{static_cast<double>(i)};
        for (int k = 0; k < d; ++k) row.push_back(xi(k));
        for (int k = 0; k < d; ++k) row.push_back(eta(k));
        row.insert(row.end(), {a, m.value, m.std_error, z});
        ct.add(row);
    }
    rep.tables.push_back(ct);
    const int allowed = get_or(sec, "excursions_allowed", (n_probes + 89) / 90);
    rep.check("char_function_excursions", excursions <= allowed, excursions, allowed,
              "probes beyond " + fmt(zmax) + " standard errors; worst z=" + fmt(zworst));

    if (sec.contains("moment")) {
        const json& m = sec.at("moment");
        const double q = get_or(m, "q", 0.5 * alpha);
        const auto hz = list_or(m, "horizons", {0.01, 0.03, 0.1, 0.3, 1.0});
        const auto np = static_cast<std::size_t>(get_or(m, "n_paths", 100000));
        const int ns = get_or(m, "n_steps", 16);
        const ScalingFit fv = moment_scaling_fit(path, q, hz, np, Component::V, ns, cfg.seed);
        const ScalingFit fx = moment_scaling_fit(path, q, hz, np, Component::X, ns, cfg.seed + 1);
        Table mt{"moment_scaling", {"component", "q", "exponent", "expected", "std_error", "intercept"}, {}};
        mt.add({0.0, q, fv.exponent, q / alpha, fv.std_error, fv.intercept});
        mt.add({1.0, q, fx.exponent, q * (1.0 + alpha) / alpha, fx.std_error, fx.intercept});
        rep.tables.push_back(mt);
        const double tv = get_or(m, "tol_v", 0.05), tx = get_or(m, "tol_x", 0.08);
        rep.check("moment_exponent_V", std::abs(fv.exponent - q / alpha) <= tv, std::abs(fv.exponent - q / alpha), tv,
                  "exponent " + fmt(fv.exponent));
        const double ex = q * (1.0 + alpha) / alpha;
        rep.check("moment_exponent_X", std::abs(fx.exponent - ex) <= tx, std::abs(fx.exponent - ex), tx,
                  "exponent " + fmt(fx.exponent));
    }

    if (sec.contains("scaling")) {
        const json& sc = sec.at("scaling");
        const double t0 = get_or(sc, "t0", 0.0), factor = get_or(sc, "factor", 5.0);
        const auto np = static_cast<std::size_t>(get_or(sc, "n_paths", 100000));
        const int ns = get_or(sc, "n_steps", 32), nq = get_or(sc, "probes", 20);
        std::vector<std::pair<Vec, Vec>> probes;
        std::uint64_t ps = cfg.seed ^ 0xabcdef;
        for (int i = 0; i < nq; ++i) {
            Vec xi(d), eta(d);
            for (int k = 0; k < d; ++k) xi(k) = pscale * unit_symmetric(ps);
            for (int k = 0; k < d; ++k) eta(k) = pscale * unit_symmetric(ps);
            probes.emplace_back(xi, eta);
        }
        Table lt{"scaling_law", {"r", "t0", "discrepancy", "std_error", "negative_control"}, {}};
        for (double r : list_or(sc, "r", {1.0, 2.0})) {
            // probes live on the unit-time scale of the rescaled process
            std::vector<std::pair<Vec, Vec>> pr;
            const double hr = std::pow(r, alpha);
            for (const auto& [xi, eta] : probes)
                pr.emplace_back(Vec(xi / std::pow(hr, 1.0 / alpha + 1.0)), Vec(eta / std::pow(hr, 1.0 / alpha)));
            const ScalingLawResult res = scaling_law_check(path, r, t0, pr, np, cfg.seed, ns);
            const ScalingLawResult neg = scaling_law_check(path, r, t0, pr, np, cfg.seed, ns, -1.0);
            lt.add({r, t0, res.max_discrepancy, res.std_error, neg.max_discrepancy});
            rep.check("scaling_law_r=" + fmt(r), res.max_discrepancy <= factor * res.std_error, res.max_discrepancy,
                      factor * res.std_error, "negative control " + fmt(neg.max_discrepancy));
        }
        rep.tables.push_back(lt);

        // identity for the ball averages of 𝒫_1, 𝒫_2 (needs a Gaussian packet source)
        if (cfg.has_source && flag_or(sc, "identity", true)) {
            require(d == 1, "harness_cli.mc-validate", "scaling identity is implemented for d = 1");
            const GaussianPacket src(cfg.source);
            const double tol = get_or(sc, "identity_tol", 1e-3);
            ScalingIdentitySpec spec;
            spec.t0 = t0;
            spec.x0 = get_or(sc, "x0", 0.3);
            spec.v0 = get_or(sc, "v0", -0.2);
            spec.lambda = get_or(sc, "lambda", 1.0);
            spec.nodes = get_or(sc, "identity_nodes", 12);
            spec.subtract_mean = true;
            Table it{"scaling_identity", {"r", "operator", "lhs", "rhs", "rel_error", "mean", "negative_control"}, {}};
            for (double r : list_or(sc, "r", {1.0, 2.0}))
                for (int which : {1, 2}) {
                    spec.r = r;
                    spec.which = which;
                    spec.unscaled_lambda = false;
                    const ScalingIdentityResult res = scaling_identity_check(path, src, spec, cfg.grid);
                    spec.unscaled_lambda = true;
                    const double neg = r == 1.0 ? 0.0 : scaling_identity_check(path, src, spec, cfg.grid).rel_error;
                    it.add({r, static_cast<double>(which), res.lhs, res.rhs, res.rel_error, res.a, neg});
                    rep.check("scaling_identity_P" + std::to_string(which) + "_r=" + fmt(r), res.rel_error <= tol,
                              res.rel_error, tol, "negative control (lambda not rescaled) " + fmt(neg));
                }
            rep.tables.push_back(it);
        }
    }
    return rep;
}

namespace {

GaussPoly poly_from_json(const json& j, int d) {
    GaussPoly g;
    g.amp = get_or(j, "amp", 1.0);
    g.center = j.contains("center") ? vec_from_json(j.at("center"), "center") : Vec(Vec::Zero(d));
    if (g.center.size() != d) throw ConfigError("harness_cli.config: test-function centre has the wrong dimension");
    g.width = get_or(j, "width", 1.0);
    g.quad = get_or(j, "quad", 0.0);
    if (!(g.width > 0.0)) throw ConfigError("harness_cli.config: test-function width must be positive");
    return g;
}

GaussPoly make_poly(int d, double amp, std::vector<double> c, double width, double quad) {
    GaussPoly g;
    g.amp = amp;
    g.center = Vec::Zero(d);
    for (int k = 0; k < d && k < static_cast<int>(c.size()); ++k) g.center(k) = c[k];
    g.width = width;
    g.quad = quad;
    return g;
}

}  // namespace

RunReport suite_boltzmann_check(const ExperimentConfig& cfg) {
    const json sec = section(cfg, "boltzmann");
    RunReport rep;
    rep.command = "boltzmann-check";
    CollisionKernelSpec k;
    k.gamma = get_or(sec, "gamma", 0.2);
    k.alpha = get_or(sec, "alpha", 0.5);
    k.dim = get_or(sec, "dim", 2);
    k.scale = get_or(sec, "scale", 1.0);
    try {
        k.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("harness_cli.config: ") + e.what());
    }
    const int d = k.dim;
    std::vector<std::pair<GaussPoly, GaussPoly>> pairs;
    if (sec.contains("functions")) {
        for (const auto& p : sec.at("functions")) pairs.emplace_back(poly_from_json(p.at("f"), d), poly_from_json(p.at("g"), d));
    } else {
        pairs = {{make_poly(d, 1.0, {}, 1.0, 0.0), make_poly(d, 1.0, {}, 1.0, 0.0)},
                 {make_poly(d, 1.0, {}, 1.0, 0.0), make_poly(d, 1.0, {0.3, 0.0}, 0.8, 0.2)},
                 {make_poly(d, 1.0, {-0.5, 0.2}, 0.7, 0.5), make_poly(d, 1.0, {}, 1.2, 0.0)},
                 {make_poly(d, 2.0, {}, 1.3, 0.0), make_poly(d, 1.0, {0.4, -0.3}, 0.6, 0.0)},
                 {make_poly(d, 1.0, {0.2, 0.1}, 0.9, 1.0), make_poly(d, 1.0, {-0.2, 0.5}, 1.1, 0.3)}};
    }
    std::vector<Vec> probes;
    if (sec.contains("probes")) {
        for (const auto& p : sec.at("probes")) probes.push_back(vec_from_json(p, "probes"));
    } else {
        const double pv[5][2] = {{0.0, 0.0}, {0.7, -0.4}, {-0.5, 0.9}, {1.2, 0.3}, {-0.3, -1.1}};
        for (const auto& p : pv) {
            Vec v = Vec::Zero(d);
            v(0) = p[0];
            v(1) = p[1];
            probes.push_back(v);
        }
    }
    for (const auto& v : probes)
        if (v.size() != d) throw ConfigError("harness_cli.config: Boltzmann probe has the wrong dimension");

    BoltzQuad q;
    q.tol = get_or(sec, "quad_tol", q.tol);
    const double cross_tol = get_or(sec, "cross_tol", 2e-3), split_tol = get_or(sec, "split_tol", 4e-3);
    const double sym_tol = get_or(sec, "symmetry_tol", 1e-10);

    std::vector<std::string> cols{"pair"};
    for (int i = 0; i < d; ++i) cols.push_back("v" + std::to_string(i + 1));
    for (const char* c : {"carleman", "spherical", "q1", "q2", "hf", "rel_cross", "rel_split", "kf_symmetry"})
        cols.emplace_back(c);
    Table t{"collision", cols, {}};
    double worst_cross = 0.0, worst_split = 0.0, worst_sym = 0.0, worst_eq = 0.0;
    bool any_eq = false;
    for (std::size_t ip = 0; ip < pairs.size(); ++ip) {
        const auto& [f, g] = pairs[ip];
        std::vector<double> qc, qs;
        std::vector<CollisionSplit> sp;
        for (const auto& v : probes) {
            qc.push_back(collision_Q_carleman(f, g, k, v, q));
            qs.push_back(collision_Q_spherical(f, g, k, v, q));
            BoltzQuad qq = q;
            qq.check = false;
            sp.push_back(collision_split(f, g, k, v, qq));
        }
        // relative errors on the scale of the pair's largest |Q| (Q changes sign across the probes);
        // a Maxwellian pair (f = g Gaussian) has Q ≡ 0 and is checked against the loss scale g(v)H_f instead
        const bool maxwellian = !f.is_constant() && f.quad == 0.0 && g.quad == 0.0 && f.width == g.width &&
                                f.amp == g.amp && f.center == g.center;
        double scale = 0.0, loss = 0.0;
        for (double x : qs) scale = std::max(scale, std::abs(x));
        for (const auto& x : sp) loss = std::max(loss, std::abs(x.Q1));
        scale = std::max(scale, 1e-300);
        for (std::size_t j = 0; j < probes.size(); ++j) {
            const Vec& v = probes[j];
            double rc = std::abs(qc[j] - qs[j]) / scale;
            double rs = std::abs(sp[j].Q1 + sp[j].Q2 - qc[j]) / scale;
            if (maxwellian) {
                const double eq = std::max(std::abs(qc[j]), std::abs(qs[j])) / std::max(loss, 1e-300);
                worst_eq = std::max(worst_eq, eq);
                rc = std::abs(qc[j] - qs[j]) / std::max(loss, 1e-300);
                rs = std::abs(sp[j].Q1 + sp[j].Q2 - qc[j]) / std::max(loss, 1e-300);
                any_eq = true;
            }
            Vec w = Vec::Zero(d);
            w(0) = 0.6;
            w(1) = -0.3 + 0.1 * static_cast<double>(j);
            const double kp = sp[j].Kf(w), km = sp[j].Kf(Vec(-w));
            const double sym = std::abs(kp - km) / std::max(std::abs(kp), 1e-300);
            worst_cross = std::max(worst_cross, rc);
            worst_split = std::max(worst_split, rs);
            worst_sym = std::max(worst_sym, sym);
            std::vector<double> row{static_cast<double>(ip)};
            for (int i = 0; i < d; ++i) row.push_back(v(i));
            row.insert(row.end(), {qc[j], qs[j], sp[j].Q1, sp[j].Q2, sp[j].Hf, rc, rs, sym});
            t.add(row);
        }
    }
    rep.tables.push_back(t);
    rep.check("carleman_vs_spherical", worst_cross <= cross_tol, worst_cross, cross_tol);
    rep.check("split_sum", worst_split <= split_tol, worst_split, split_tol, "Q1 + Q2 against Q");
    rep.check("kf_symmetry", worst_sym <= sym_tol, worst_sym, sym_tol);
    if (any_eq) {
        const double eq_tol = get_or(sec, "equilibrium_tol", 1e-10);
        rep.check("maxwellian_equilibrium", worst_eq <= eq_tol, worst_eq, eq_tol, "|Q(M,M)| / max |g H_f|");
    }

    if (flag_or(sec, "coarea", true)) {
        const double coarea_tol = get_or(sec, "coarea_tol", 1e-4);
        auto F = [](const Vec& x, const Vec&) { return std::exp(-x.squaredNorm()); };
        const CoareaResult c = coarea_identity_check(F, d);
        const double exact = sphere_area(d) * std::pow(kPi, 0.5 * d);
        const double err = std::max(std::abs(c.lhs - exact), std::abs(c.rhs - exact)) / exact;
        Table ca{"coarea", {"dim", "lhs", "rhs", "closed_form", "rel_error"}, {}};
        ca.add({static_cast<double>(d), c.lhs, c.rhs, exact, err});
        rep.tables.push_back(ca);
        rep.check("coarea_gaussian", err <= coarea_tol, err, coarea_tol, "both sides against the closed form");
    }
    return rep;
}

RunReport suite_geometry_check(const ExperimentConfig& cfg) {
    require_path(cfg);
    const json sec = section(cfg, "geometry");
    RunReport rep;
    rep.command = "geometry-check";
    const CoefficientPath& path = cfg.path;
    const int d = path.dim();
    const double alpha = get_or(sec, "alpha", path.alpha());
    const auto trials = static_cast<std::size_t>(get_or(sec, "trials", 100000));
    const double r_lo = get_or(sec, "r_lo", 0.05), r_hi = get_or(sec, "r_hi", 5.0);
    const std::uint64_t seed = cfg.seed;

    const std::size_t engulf = engulf_check(path, alpha, trials, r_lo, r_hi, seed);
    const std::size_t engulf_neg = engulf_check(path, alpha, std::max<std::size_t>(trials / 50, 100), r_lo, r_hi,
                                                seed, 1.01);
    const double c_stated = sandwich_constant(path, alpha);
    const SandwichResult sw = sandwich_check(path, alpha, trials, r_lo, r_hi, seed + 1);
    const double c_alt = 4.0 + path.sup_U_norm();
    const SandwichResult sw_alt = sandwich_check(path, alpha, trials, r_lo, r_hi, seed + 1, c_alt);
    const double c0a = quasi_triangle_constant(path, alpha, static_cast<std::size_t>(get_or(sec, "triples", 1000000)),
                                               seed + 2);
    const double c0b = quasi_triangle_constant(path, alpha, static_cast<std::size_t>(get_or(sec, "triples", 1000000)),
                                               seed + 3);
    KineticPoint z;
    z.t = 0.3;
    z.x = Vec::Constant(d, 0.2);
    z.v = Vec::Constant(d, 0.7);
    const auto radii = list_or(sec, "volume_radii", {0.5, 1.0, 2.0, 4.0});
    const double vexp = ball_volume_exponent(path, z, alpha, radii, get_or(sec, "volume_cells", d == 1 ? 160 : 24));
    const double vexp_expected = alpha + (2.0 + alpha) * d;

    // sharp vs maximal on a lattice function
    const int n = get_or(sec, "lattice_cells", d == 1 ? 40 : 10);
    std::vector<double> lo{-1.0}, hi{1.0};
    std::vector<int> cells{n};
    for (int k = 0; k < 2 * d; ++k) {
        lo.push_back(-2.0);
        hi.push_back(2.0);
        cells.push_back(n);
    }
    Lattice lat = Lattice::make(d, lo, hi, cells);
    lat.fill([](const KineticPoint& p) {
        return std::cos(2.0 * p.x(0)) * std::exp(-p.v.squaredNorm()) + 0.5 * p.t + 0.3 * p.v(0);
    });
    const auto rad = default_radii(lat, alpha);
    std::uint64_t st = seed ^ 0x5eed;
    const int npts = get_or(sec, "sample_points", 32);
    Table mt{"maximal_sharp", {"t", "x1", "v1", "maximal", "sharp", "clipped"}, {}};
    double worst = 0.0;
    for (int i = 0; i < npts; ++i) {
        KineticPoint p;
        p.t = 0.5 * unit_symmetric(st);
        p.x = Vec(d);
        p.v = Vec(d);
        for (int k = 0; k < d; ++k) p.x(k) = 1.0 * unit_symmetric(st);
        for (int k = 0; k < d; ++k) p.v(k) = 1.0 * unit_symmetric(st);
        const OperatorValue M = maximal_function(path, lat, p, alpha, rad);
        const OperatorValue S = sharp_function(path, lat, p, alpha, rad);
        worst = std::max(worst, S.value / std::max(M.value, 1e-300));
        mt.add({p.t, p.x(0), p.v(0), M.value, S.value, (M.clipped || S.clipped) ? 1.0 : 0.0});
    }
    rep.tables.push_back(mt);

    Table g{"geometry",
            {"alpha", "engulf_constant", "engulf_violations", "engulf_negative_control", "sandwich_constant",
             "sandwich_inner", "sandwich_outer", "sandwich_worst_ratio", "alt_constant", "alt_outer", "c0_seed_a",
             "c0_seed_b", "volume_exponent", "volume_expected"},
            {}};
    g.add({alpha, engulf_constant(path, alpha), static_cast<double>(engulf), static_cast<double>(engulf_neg), c_stated,
           static_cast<double>(sw.inner_violations), static_cast<double>(sw.outer_violations), sw.worst_ratio, c_alt,
           static_cast<double>(sw_alt.outer_violations), c0a, c0b, vexp, vexp_expected});
    rep.tables.push_back(g);

    rep.check("engulf", engulf == 0, static_cast<double>(engulf), 0.0, "negative control c1=1.01: " +
                                                                           std::to_string(engulf_neg) + " violations");
    const std::size_t sv = sw.inner_violations + sw.outer_violations;
    rep.check("sandwich", sv == 0, static_cast<double>(sv), 0.0,
              "c=" + fmt(c_stated) + ", worst ratio " + fmt(sw.worst_ratio) + "; with c=4+|U|: " +
                  std::to_string(sw_alt.inner_violations + sw_alt.outer_violations) + " violations");
    const double verr = std::abs(vexp - vexp_expected) / vexp_expected;
    rep.check("ball_volume_exponent", verr <= 0.01, verr, 0.01, "fitted " + fmt(vexp));
    rep.check("sharp_le_2_maximal", worst <= 2.0, worst, 2.0, "max sharp/maximal");
    const double ratio = std::max(c0a, c0b) / std::min(c0a, c0b);
    rep.check("quasi_triangle_stable", std::isfinite(c0a) && std::isfinite(c0b) && ratio < 2.0, ratio, 2.0,
              "c0 = " + fmt(c0a) + ", " + fmt(c0b));
    return rep;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"verify-l2", "verify-lp",      "mc-validate", "boltzmann-check",
                                                "geometry-check", "sweep", "symbol"};
    return names;
}

RunReport run_suite(const std::string& name, const ExperimentConfig& cfg) {
    if (name == "verify-l2") return suite_verify_l2(cfg);
    if (name == "verify-lp") return suite_verify_lp(cfg);
    if (name == "mc-validate") return suite_mc_validate(cfg);
    if (name == "boltzmann-check") return suite_boltzmann_check(cfg);
    if (name == "geometry-check") return suite_geometry_check(cfg);
    if (name == "sweep") return suite_sweep(cfg);
    if (name == "symbol") return suite_symbol(cfg);
    fail_invalid("harness_cli.run_suite", "unknown subcommand " + name);
}

}  // namespace khypo
