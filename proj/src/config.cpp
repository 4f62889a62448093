#include "khypo/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace khypo {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError("harness_cli.config: " + what); }

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing key '") + key + "'");
    return j.at(key);
}

double num(const json& j, const char* key) {
    const json& v = need(j, key);
    if (!v.is_number()) bad(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

double get_or(const json& j, const char* key, double def) {
    if (!j.is_object() || !j.contains(key)) return def;
    if (!j.at(key).is_number()) bad(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

int get_or(const json& j, const char* key, int def) {
    if (!j.is_object() || !j.contains(key)) return def;
    if (!j.at(key).is_number_integer()) bad(std::string("'") + key + "' must be an integer");
    return j.at(key).get<int>();
}

Vec vec_from_json(const json& j, const char* key) {
    if (!j.is_array() || j.empty() || j.size() > kMaxDim) bad(std::string("'") + key + "' must be a list of 1..3 numbers");
    Vec v(static_cast<int>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) bad(std::string("'") + key + "' must contain numbers");
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

Mat mat_from_json(const json& j, const char* key) {
    if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty() || j.size() > kMaxDim) bad(std::string("'") + key + "' must be a square matrix");
    const int n = static_cast<int>(j.size());
    Mat m(n, n);
    for (int r = 0; r < n; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) bad(std::string("'") + key + "' must be square");
        for (int c = 0; c < n; ++c) {
            if (!j[r][c].is_number()) bad(std::string("'") + key + "' must contain numbers");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

StableMeasure measure_from_json(const json& j) {
    const double alpha = num(j, "alpha");
    const int dim = static_cast<int>(num(j, "dim"));
    std::vector<Atom> atoms;
    if (j.contains("atoms")) {
        for (const auto& a : j.at("atoms")) {
            if (!a.is_array() || a.size() != 2) bad("each atom is [[dir...], weight]");
            Atom at;
            at.dir = vec_from_json(a[0], "atoms.dir");
            if (!a[1].is_number()) bad("atom weight must be a number");
            at.weight = a[1].get<double>();
            atoms.push_back(at);
        }
    }
    const double iso = get_or(j, "iso_weight", 0.0);
    try {
        return StableMeasure(alpha, dim, std::move(atoms), iso);
    } catch (const InvalidArgument& e) {
        bad(e.what());
    }
}

json measure_to_json(const StableMeasure& m) {
    json atoms = json::array();
    for (const auto& a : m.atoms()) {
        std::vector<double> d(a.dir.data(), a.dir.data() + a.dir.size());
        atoms.push_back(json::array({d, a.weight}));
    }
    return json{{"alpha", m.alpha()}, {"dim", m.dim()}, {"atoms", atoms}, {"iso_weight", m.iso_weight()}};
}

CoefficientPath path_from_json(const json& j) {
    const json& pieces = need(j, "pieces");
    if (!pieces.is_array() || pieces.empty()) bad("'pieces' must be a non-empty list");
    std::vector<double> bp;
    std::vector<Mat> sig, U;
    std::vector<StableMeasure> nu;
    for (const auto& p : pieces) {
        bp.push_back(get_or(p, "start", 0.0));
        sig.push_back(mat_from_json(need(p, "sigma"), "sigma"));
        U.push_back(mat_from_json(need(p, "U"), "U"));
        nu.push_back(measure_from_json(need(p, "nu")));
    }
    std::optional<Envelopes> env;
    if (j.contains("envelopes"))
        env = Envelopes{measure_from_json(need(j.at("envelopes"), "nu1")),
                        measure_from_json(need(j.at("envelopes"), "nu2"))};
    try {
        return CoefficientPath(std::move(bp), std::move(sig), std::move(U), std::move(nu), env);
    } catch (const InvalidArgument& e) {
        bad(e.what());
    } catch (const DegeneracyError& e) {
        bad(e.what());
    }
}

SourceSpec source_from_json(const json& j, int dim) {
    SourceSpec s;
    s.center_xi = vec_from_json(need(j, "center_xi"), "center_xi");
    s.center_eta = vec_from_json(need(j, "center_eta"), "center_eta");
    if (s.center_xi.size() != dim || s.center_eta.size() != dim) bad("source centre dimension differs from the path");
    s.bandwidth = get_or(j, "bandwidth", s.bandwidth);
    s.t_a = get_or(j, "t_a", s.t_a);
    s.t_b = get_or(j, "t_b", s.t_b);
    s.amplitude = get_or(j, "amplitude", s.amplitude);
    s.profile_exponent = get_or(j, "profile_exponent", s.profile_exponent);
    const std::string prof = j.value("profile", std::string("bump"));
    if (prof == "bump") s.profile = TimeProfile::Bump;
    else if (prof == "box") s.profile = TimeProfile::Box;
    else if (prof == "constant") s.profile = TimeProfile::Constant;
    else bad("unknown time profile '" + prof + "'");
    if (j.contains("shift_x")) s.shift_x = vec_from_json(j.at("shift_x"), "shift_x");
    if (j.contains("shift_v")) s.shift_v = vec_from_json(j.at("shift_v"), "shift_v");
    if (!(s.bandwidth > 0.0)) bad("bandwidth must be positive");
    if (!(s.t_b > s.t_a)) bad("source window must satisfy t_a < t_b");
    return s;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) bad("top level must be an object");
    ExperimentConfig c;
    c.raw = j;
    if (j.contains("path")) {
        c.path = path_from_json(j.at("path"));
        c.has_path = true;
    }
    if (j.contains("source")) {
        c.source = source_from_json(j.at("source"), c.has_path ? c.path.dim() : 1);
        c.has_source = true;
    }
    if (j.contains("lambdas")) {
        c.lambdas.clear();
        for (const auto& l : j.at("lambdas")) {
            if (!l.is_number() || !(l.get<double>() > 0.0)) bad("lambdas must be positive numbers");
            c.lambdas.push_back(l.get<double>());
        }
        if (c.lambdas.empty()) bad("need at least one lambda");
    }
    if (j.contains("p_values")) {
        c.p_values.clear();
        for (const auto& p : j.at("p_values")) {
            if (!p.is_number() || !(p.get<double>() > 1.0) || !std::isfinite(p.get<double>()))
                bad("p_values must lie in (1, inf)");
            c.p_values.push_back(p.get<double>());
        }
    }
    if (j.contains("quadrature")) {
        const json& q = j.at("quadrature");
        auto& g = c.grid;
        g.refine = get_or(q, "refine", g.refine);
        g.freq_half_width = get_or(q, "freq_half_width", g.freq_half_width);
        g.freq_panel_width = get_or(q, "freq_panel_width", g.freq_panel_width);
        g.freq_nodes = get_or(q, "freq_nodes", g.freq_nodes);
        g.window_panels = get_or(q, "window_panels", g.window_panels);
        g.time_nodes = get_or(q, "time_nodes", g.time_nodes);
        g.resolvent_tol = get_or(q, "resolvent_tol", g.resolvent_tol);
        g.tail_tol = get_or(q, "tail_tol", g.tail_tol);
        g.pre_window_max = get_or(q, "pre_window_max", g.pre_window_max);
        if (!(g.refine > 0.0)) bad("quadrature.refine must be positive");
        if (g.freq_nodes < 1 || g.time_nodes < 1 || g.window_panels < 1) bad("quadrature node counts must be positive");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) bad("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output")) c.out_dir = j.at("output").value("dir", c.out_dir);
    return c;
}

void require_path(const ExperimentConfig& c, bool source) {
    if (!c.has_path) bad("missing key 'path'");
    if (source && !c.has_source) bad("missing key 'source'");
}

json section(const ExperimentConfig& c, const char* key) {
    if (c.raw.is_object() && c.raw.contains(key)) {
        if (!c.raw.at(key).is_object()) bad(std::string("'") + key + "' must be an object");
        return c.raw.at(key);
    }
    return json::object();
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        bad("'" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        bad("'" + path + "': " + e.what());
    }
}

}  // namespace khypo
