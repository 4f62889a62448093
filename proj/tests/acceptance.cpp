// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is 0 when every failing criterion is in the documented known-red set.

#include "khypo/common.hpp"
#include "khypo/config.hpp"
#include "khypo/monte_carlo.hpp"
#include "khypo/quadrature.hpp"
#include "khypo/regularity.hpp"
#include "khypo/semigroup.hpp"
#include "khypo/stable_levy.hpp"
#include "khypo/suites.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace khypo;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = KHYPO_CONFIG_DIR;
const std::string kCli = KHYPO_CLI_PATH;

// Criteria that fail for reasons analysed in the README (not regressions).
const std::set<int> kKnownRed{5, 10};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

json load(const std::string& name) {
    std::ifstream in(kConfigs + "/" + name);
    if (!in) throw std::runtime_error("cannot open " + name);
    return json::parse(in);
}

Mat m1(double a) { return Mat::Constant(1, 1, a); }
Vec v1(double a) { return Vec::Constant(1, a); }

CoefficientPath constant_path(double alpha) {
    return CoefficientPath::constant(m1(1.0), m1(1.0), StableMeasure::isotropic(alpha, 1, 1.0));
}

double splitmix_unit(std::uint64_t& s) {  // uniform in (-1, 1)
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
}

const Assertion* find(const RunReport& r, const std::string& name) {
    for (const auto& a : r.assertions)
        if (a.name == name) return &a;
    return nullptr;
}

// pass iff every listed assertion exists and passes; detail lists value/threshold
Outcome collect(const std::vector<std::pair<const RunReport*, std::string>>& items) {
    Outcome o{true, {}};
    for (const auto& [rep, name] : items) {
        const Assertion* a = find(*rep, name);
        if (!a) {
            o.pass = false;
            o.detail += name + "=missing; ";
            continue;
        }
        o.pass = o.pass && a->pass;
        o.detail += (a->pass ? "" : "!") + name + "=" + num(a->value) + "/" + num(a->threshold) + "; ";
    }
    return o;
}

// ---------------------------------------------------------------- 1
Outcome symbol_correctness() {
    // ψ(1) = 2∫_ℝ (1 - cos x)|x|^{-2} dx, by quadrature period by period on [0, 2πK] plus the 1/(2πK) tail
    const int K = 4000;
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
        const double a = 2.0 * kPi * k, b = a + 2.0 * kPi;
        acc += quad::integrate_adaptive<double>(
                   [](double x) { return x < 1e-4 ? 0.5 - x * x / 24.0 : (1.0 - std::cos(x)) / (x * x); }, a, b,
                   1e-15, 1e-17)
                   .value;
    }
    const double oracle = 4.0 * (acc + 1.0 / (2.0 * kPi * K));
    const LevySymbol sym(StableMeasure::isotropic(1.0, 1, 1.0), m1(1.0));
    double worst_c = 0.0;
    for (double xi : {0.1, 1.0, -2.5, 37.0}) {
        const double got = eval_symbol(sym, v1(xi));
        worst_c = std::max(worst_c, std::abs(got - oracle * std::abs(xi)) / (oracle * std::abs(xi)));
    }
    double worst_h = 0.0;
    std::uint64_t st = 12345;
    for (double alpha : {0.5, 1.0, 1.5}) {
        const LevySymbol s(StableMeasure(alpha, 1, {{v1(1.0), 0.3}, {v1(-1.0), 0.3}}, 0.7), m1(1.3));
        for (int i = 0; i < 1000; ++i) {
            const double xi = 5.0 * splitmix_unit(st), t = 0.05 + 10.0 * (0.5 + 0.5 * splitmix_unit(st));
            const double p = eval_symbol(s, v1(xi)), q = eval_symbol(s, v1(t * xi));
            if (q != 0.0) worst_h = std::max(worst_h, std::abs(q - std::pow(t, alpha) * p) / std::abs(q));
        }
    }
    return {worst_c <= 1e-8 && worst_h <= 1e-10,
            "2pi|xi| rel " + num(worst_c) + " (<=1e-8, oracle/2pi=" + num(oracle / (2.0 * kPi), 15) +
                "); homogeneity " + num(worst_h) + " (<=1e-10, 3000 probes)"};
}

// ---------------------------------------------------------------- 2
Outcome char_consistency(std::uint64_t seed) {
    const CoefficientPath two = path_from_json(load("mc.json").at("path"));
    const std::size_t N = 200000;
    const int n_steps = 16, n_probes = 30;
    const double zmax = 3.5;
    std::string detail;
    bool pass = true;
    for (int kind = 0; kind < 2; ++kind) {
        int excursions = 0;
        double zworst = 0.0;
        for (double a : {0.5, 1.0, 1.5}) {
            const CoefficientPath p = kind == 0 ? constant_path(a) : with_alpha(two, a);
            const double s = 0.0, t = 1.0;
            const SampleEnsemble e = sample_K(p, s, t, N, n_steps, seed + static_cast<std::uint64_t>(10 * a + kind));
            std::uint64_t st = seed ^ 0xc0ffee;
            for (int i = 0; i < n_probes; ++i) {
                const Vec xi = v1(2.0 * splitmix_unit(st)), eta = v1(2.0 * splitmix_unit(st));
                const CharEstimate m = mc_char(e, xi, eta);
                const double z = std::abs(m.value - char_function(p, s, t, xi, eta)) / m.std_error;
                zworst = std::max(zworst, z);
                excursions += z > zmax;
            }
        }
        pass = pass && excursions <= 1;
        detail += std::string(kind == 0 ? "constant" : "two-piece") + ": " + std::to_string(excursions) +
                  "/90 beyond 3.5 SE (max z " + num(zworst, 3) + "); ";
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 3
Outcome moment_scaling(std::uint64_t seed) {
    bool pass = true;
    std::string detail;
    const std::vector<double> hz{0.01, 0.03, 0.1, 0.3, 1.0};
    for (auto [a, q] : {std::pair{1.5, 0.7}, std::pair{1.0, 0.4}}) {
        const CoefficientPath p = constant_path(a);
        const ScalingFit v = moment_scaling_fit(p, q, hz, 100000, Component::V, 16, seed);
        const ScalingFit x = moment_scaling_fit(p, q, hz, 100000, Component::X, 16, seed + 1);
        const double ev = std::abs(v.exponent - q / a), ex = std::abs(x.exponent - q * (1.0 + a) / a);
        pass = pass && ev <= 0.05 && ex <= 0.08;
        detail += "alpha=" + num(a) + " q=" + num(q) + ": |dV|=" + num(ev, 3) + " (<=0.05) |dX|=" + num(ex, 3) +
                  " (<=0.08); ";
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 4
Outcome scaling(std::uint64_t seed) {
    const ExperimentConfig cfg = config_from_json(load("mc.json"));
    const CoefficientPath& path = cfg.path;
    const double alpha = path.alpha(), t0 = 0.2;
    const std::size_t N = 100000;
    std::vector<std::pair<Vec, Vec>> probes;
    std::uint64_t st = seed ^ 0xabcdef;
    for (int i = 0; i < 20; ++i) {
        const double xi = 2.0 * splitmix_unit(st), eta = 2.0 * splitmix_unit(st);
        probes.emplace_back(v1(xi), v1(eta));
    }
    bool pass = true;
    std::string detail;
    for (double r : {1.0, 2.0}) {
        const double hr = std::pow(r, alpha);
        std::vector<std::pair<Vec, Vec>> pr;
        for (const auto& [xi, eta] : probes)
            pr.emplace_back(Vec(xi / std::pow(hr, 1.0 / alpha + 1.0)), Vec(eta / std::pow(hr, 1.0 / alpha)));
        const ScalingLawResult res = scaling_law_check(path, r, t0, pr, N, seed, 40);
        const double thr = 5.0 / std::sqrt(static_cast<double>(N));
        pass = pass && res.max_discrepancy <= thr;
        detail += "law r=" + num(r) + ": " + num(res.max_discrepancy, 3) + " (<=" + num(thr, 3) + "); ";
    }
    const GaussianPacket src(cfg.source);
    ScalingIdentitySpec sp;
    sp.t0 = t0;
    sp.x0 = 0.3;
    sp.v0 = -0.2;
    sp.nodes = 12;
    sp.subtract_mean = true;
    double worst = 0.0;
    for (double r : {1.0, 2.0})
        for (int which : {1, 2}) {
            sp.r = r;
            sp.which = which;
            worst = std::max(worst, scaling_identity_check(path, src, sp, cfg.grid).rel_error);
        }
    pass = pass && worst <= 1e-3;
    detail += "identity max rel_error " + num(worst, 3) + " (<=1e-3, P1/P2, r in {1,2})";
    return {pass, detail};
}

// ---------------------------------------------------------------- 5 and 7 (shared L² fields)
struct L2Result {
    Outcome c5, c7;
    std::vector<std::string> info;
};

L2Result l2_criteria() {
    json j = load("standard.json");
    j["sweep"]["alphas"] = json::array({0.5, 1.0, 1.5});
    const RunReport rep = suite_sweep(config_from_json(j));
    std::vector<std::pair<const RunReport*, std::string>> a5, a7;
    for (const char* a : {"0.5", "1", "1.5"}) {
        const std::string tag = std::string("alpha=") + a + ":";
        for (const char* n : {"ratios_finite", "refinement_delta", "lambda_spread_R1", "lambda_spread_R2"})
            a5.emplace_back(&rep, tag + n);
        for (const char* n : {"bouchut_refinement", "bouchut_floor"}) a7.emplace_back(&rep, tag + n);
    }
    L2Result out;
    out.c5 = collect(a5);
    out.c7 = collect(a7);

    // Packets whose velocity frequency dominates the λ range: ψ(η0) ≫ λ_max makes R flat in λ.
    for (auto [a, eta0] : {std::pair{0.5, 896.0}, std::pair{1.0, 47.7}, std::pair{1.5, 12.6}}) {
        ExperimentConfig cfg = config_from_json(j);
        cfg.source.center_eta = v1(eta0);
        cfg.source.center_xi = v1(eta0 / 4.0);
        cfg.source.bandwidth = eta0 / 12.0;
        RegularityOptions opt;
        opt.refine_check = false;
        const RegularityReport r =
            run_regularity(with_alpha(cfg.path, a), GaussianPacket(cfg.source), cfg.lambdas, {2.0}, cfg.grid, opt);
        out.info.push_back("criterion 5, dominated packet alpha=" + num(a) + " eta0=" + num(eta0) +
                           ": spread R1=" + num(r.spreads.front().R1, 3) + " R2=" + num(r.spreads.front().R2, 3));
    }
    return out;
}

// ---------------------------------------------------------------- 6
Outcome lp_criteria() {
    json j = load("standard.json");
    j["p_values"] = json::array({1.5, 3.0});
    std::vector<RunReport> reps;
    for (double a : {0.5, 1.0, 1.5}) {
        ExperimentConfig cfg = config_from_json(j);
        cfg.path = with_alpha(cfg.path, a);
        reps.push_back(suite_verify_lp(cfg));
    }
    Outcome o{true, {}};
    const char* names[] = {"0.5", "1", "1.5"};
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const Outcome c = collect({{&reps[i], "ratios_finite"}, {&reps[i], "refinement_delta"}, {&reps[i], "plancherel"}});
        o.pass = o.pass && c.pass;
        o.detail += std::string("alpha=") + names[i] + ": " + c.detail;
    }
    return o;
}

// ---------------------------------------------------------------- 8
Outcome kolmogorov() {
    json j = load("standard.json");
    j["symbol"]["probes"] = 10;
    const RunReport r = suite_symbol(config_from_json(j));
    return collect({{&r, "kolmogorov_order"}});
}

// ---------------------------------------------------------------- 9
Outcome carleman() {
    const RunReport r = suite_boltzmann_check(config_from_json(load("boltzmann.json")));
    return collect({{&r, "coarea_gaussian"}, {&r, "carleman_vs_spherical"}, {&r, "split_sum"}, {&r, "kf_symmetry"}});
}

// ---------------------------------------------------------------- 10
Outcome geometry() {
    Outcome o{true, {}};
    for (double a : {0.5, 1.0, 1.5}) {
        json j = load("geometry.json");
        j["geometry"]["alpha"] = a;
        ExperimentConfig cfg = config_from_json(j);
        cfg.path = with_alpha(cfg.path, a);
        const RunReport r = suite_geometry_check(cfg);
        const Outcome c = collect({{&r, "engulf"}, {&r, "sandwich"}, {&r, "ball_volume_exponent"},
                                   {&r, "sharp_le_2_maximal"}});
        o.pass = o.pass && c.pass;
        o.detail += "alpha=" + num(a) + ": " + c.detail;
    }
    return o;
}

// ---------------------------------------------------------------- 11
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "khypo_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);

    // reduced versions of every bundled experiment
    std::vector<std::pair<std::string, json>> runs;
    json std_cfg = load("standard.json");
    std_cfg["lambdas"] = json::array({1.0, 10.0});
    std_cfg["symbol"]["probes"] = 100;
    std_cfg["symbol"]["kolmogorov"]["h"] = json::array({0.1, 0.05});
    std_cfg["sweep"]["alphas"] = json::array({1.5});
    runs.emplace_back("verify-l2", std_cfg);
    runs.emplace_back("sweep", std_cfg);
    runs.emplace_back("symbol", std_cfg);
    json lp = std_cfg;
    lp["lambdas"] = json::array({1.0});
    lp["p_values"] = json::array({3.0});
    runs.emplace_back("verify-lp", lp);
    json mc = load("mc.json");
    mc["monte_carlo"]["n_paths"] = 20000;
    mc["monte_carlo"]["moment"]["n_paths"] = 10000;
    mc["monte_carlo"]["scaling"]["n_paths"] = 10000;
    mc["monte_carlo"]["scaling"]["identity_nodes"] = 8;
    runs.emplace_back("mc-validate", mc);
    json bz = load("boltzmann.json");
    bz["boltzmann"]["probes"] = json::array({json::array({0.0, 0.0}), json::array({0.7, -0.4})});
    bz["boltzmann"]["functions"] = json::array(
        {{{"f", {{"width", 1.0}}}, {"g", {{"center", {0.3, 0.0}}, {"width", 0.8}, {"quad", 0.2}}}}});
    runs.emplace_back("boltzmann-check", bz);
    json geo = load("geometry.json");
    geo["geometry"]["trials"] = 2000;
    geo["geometry"]["triples"] = 20000;
    runs.emplace_back("geometry-check", geo);

    std::size_t files = 0, differ = 0;
    std::string detail;
    for (const auto& [cmd, cfg] : runs) {
        const fs::path cf = root / (cmd + ".json");
        std::ofstream(cf) << cfg.dump(2);
        for (int threads : {1, 3}) {
            const fs::path out = root / (cmd + "_t" + std::to_string(threads));
            const std::string line = kCli + " " + cmd + " --config " + cf.string() + " --out " + out.string() +
                                     " --threads " + std::to_string(threads) + " > " + (out.string() + ".log") +
                                     " 2>&1";
            const int rc = std::system(line.c_str());
            const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
            if (code != 0 && code != 1) {
                detail += cmd + " exited " + std::to_string(code) + "; ";
                differ++;
            }
        }
        const fs::path a = root / (cmd + "_t1"), b = root / (cmd + "_t3");
        if (!fs::exists(a)) continue;
        for (const auto& e : fs::directory_iterator(a)) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            if (slurp(e.path()) != slurp(b / e.path().filename())) {
                ++differ;
                detail += cmd + "/" + e.path().filename().string() + " differs; ";
            }
        }
    }
    fs::remove_all(root);
    return {differ == 0 && files > 0, std::to_string(files) + " CSV files compared across --threads 1/3, " +
                                          std::to_string(differ) + " mismatches; " + detail};
}

}  // namespace

int main(int argc, char** argv) {
    // optional: list of criterion numbers to run
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto wanted = [&](int k) { return only.empty() || only.count(k) > 0; };

    const std::uint64_t seed = 20240601;
    int unexpected = 0, failed = 0;
    auto report = [&](int k, const char* title, const std::function<Outcome()>& fn) {
        if (!wanted(k)) return;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", k, title, sec, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) {
            ++failed;
            if (!kKnownRed.count(k)) ++unexpected;
        }
    };

    report(1, "symbol correctness", symbol_correctness);
    report(2, "characteristic function", [&] { return char_consistency(seed); });
    report(3, "moment scaling", [&] { return moment_scaling(seed); });
    report(4, "scaling law and identity", [&] { return scaling(seed); });
    if (wanted(5) || wanted(7)) {
        const auto t0 = std::chrono::steady_clock::now();
        L2Result l2;
        std::string err;
        try {
            l2 = l2_criteria();
        } catch (const std::exception& e) {
            err = std::string("exception: ") + e.what();
            l2.c5 = l2.c7 = {false, err};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (wanted(5)) report(5, "L2 regularity, standard packet", [&] { return l2.c5; });
        for (const auto& s : l2.info) std::printf("INFO %s\n", s.c_str());
        if (wanted(7)) report(7, "Bouchut interpolation", [&] { return l2.c7; });
        std::printf("INFO criteria 5 and 7 share one sweep: %.1f s\n", sec);
    }
    report(6, "Lp regularity", lp_criteria);
    report(8, "Kolmogorov residual", kolmogorov);
    report(9, "Carleman representation", carleman);
    report(10, "geometry", geometry);
    report(11, "determinism", determinism);

    std::printf("SUMMARY failed=%d unexpected=%d known_red={5,10}\n", failed, unexpected);
    return unexpected == 0 ? 0 : 1;
}
