#include "khypo/report.hpp"

#include "khypo/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace khypo {

void Table::add(std::vector<double> row) {
    require(row.size() == columns.size(), "harness_cli.report", "row width differs from the header in " + name);
    rows.push_back(std::move(row));
}

bool RunReport::all_pass() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

const Table& RunReport::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return t;
    fail_invalid("harness_cli.report", "no table named " + name);
}

void RunReport::check(std::string name, bool pass, double value, double threshold, std::string detail) {
    assertions.push_back({std::move(name), pass, value, threshold, std::move(detail)});
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string summary_line(const Assertion& a) {
    std::string s = (a.pass ? "PASS " : "FAIL ") + a.name + " value=" + format_number(a.value) +
                    " threshold=" + format_number(a.threshold);
    if (!a.detail.empty()) s += " (" + a.detail + ")";
    return s;
}

static void header(std::ostream& os) { os << "# kinetic-hypo v" << version_string() << " schema=1\n"; }

void write_csv(const Table& t, std::ostream& os) {
    header(os);
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_number(r[c]);
        os << '\n';
    }
}

static nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);  // JSON has no NaN/inf
}

nlohmann::json report_json(const RunReport& r) {
    nlohmann::json j;
    j["version"] = version_string();
    j["schema"] = 1;
    j["command"] = r.command;
    j["assertions"] = nlohmann::json::array();
    for (const auto& a : r.assertions)
        j["assertions"].push_back(
            {{"name", a.name}, {"pass", a.pass}, {"value", number(a.value)}, {"threshold", number(a.threshold)},
             {"detail", a.detail}});
    j["notes"] = r.notes;
    j["tables"] = nlohmann::json::object();
    for (const auto& t : r.tables) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json jr = nlohmann::json::array();
            for (double v : row) jr.push_back(number(v));
            rows.push_back(jr);
        }
        j["tables"][t.name] = {{"columns", t.columns}, {"rows", rows}};
    }
    return j;
}

void write_svg(const Table& t, const std::string& x_column, const std::vector<std::string>& y_columns,
               std::ostream& os) {
    auto col = [&](const std::string& n) {
        const auto it = std::find(t.columns.begin(), t.columns.end(), n);
        require(it != t.columns.end(), "harness_cli.write_svg", "unknown column " + n);
        return static_cast<std::size_t>(it - t.columns.begin());
    };
    const std::size_t cx = col(x_column);
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& r : t.rows) {
        if (!(r[cx] > 0.0)) continue;
        x0 = std::min(x0, std::log10(r[cx]));
        x1 = std::max(x1, std::log10(r[cx]));
        for (const auto& y : y_columns) {
            const double v = r[col(y)];
            if (!std::isfinite(v)) continue;
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
    if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
    y0 = std::min(y0, 0.0);
    const double W = 640, H = 400, L = 70, R = 20, T = 20, B = 50;
    auto px = [&](double x) { return L + (std::log10(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    char buf[256];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - B,
                  W - R, H - B);
    os << buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L,
                  H - B);
    os << buf;
    for (int e = static_cast<int>(std::floor(x0)); e <= static_cast<int>(std::ceil(x1)); ++e) {
        const double x = std::pow(10.0, e);
        if (std::log10(x) < x0 - 1e-9 || std::log10(x) > x1 + 1e-9) continue;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">1e%d</text>\n", px(x),
                      H - B + 18, e);
        os << buf;
    }
    for (int k = 0; k <= 4; ++k) {
        const double y = y0 + (y1 - y0) * k / 4.0;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.3g</text>\n",
                      L - 6, py(y) + 4, y);
        os << buf;
    }
    os << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 10) << "\" font-size=\"13\" text-anchor=\"middle\">"
       << x_column << " (log scale)</text>\n";
    for (std::size_t s = 0; s < y_columns.size(); ++s) {
        const std::size_t cy = col(y_columns[s]);
        os << "<polyline fill=\"none\" stroke=\"" << colors[s % 6] << "\" stroke-width=\"2\" points=\"";
        for (const auto& r : t.rows) {
            if (!(r[cx] > 0.0) || !std::isfinite(r[cy])) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(r[cx]), py(r[cy]));
            os << buf;
        }
        os << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      W - R - 120, T + 16.0 * (s + 1), colors[s % 6], y_columns[s].c_str());
        os << buf;
    }
    os << "</svg>\n";
}

void emit_report(const RunReport& r, const std::string& out_dir, Format fmt) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("harness_cli.emit_report: cannot create output directory '" + out_dir + "'");
    auto open = [&](const std::string& name) {
        std::ofstream os(fs::path(out_dir) / name, std::ios::binary);
        if (!os) throw ConfigError("harness_cli.emit_report: cannot write '" + (fs::path(out_dir) / name).string() + "'");
        return os;
    };
    for (const auto& [name, bytes] : r.blobs) {
        auto os = open(name);
        os << bytes;
    }
    if (fmt == Format::Json) {
        auto os = open(r.command + ".json");
        os << report_json(r).dump(2) << '\n';
        return;
    }
    for (const auto& p : r.plots) {
        auto os = open(p.file);
        write_svg(r.table(p.table), p.x, p.ys, os);
    }
    for (const auto& t : r.tables) {
        auto os = open(t.name + ".csv");
        write_csv(t, os);
    }
    auto os = open("assertions.csv");
    header(os);
    os << "name,pass,value,threshold\n";
    for (const auto& a : r.assertions)
        os << a.name << ',' << (a.pass ? 1 : 0) << ',' << format_number(a.value) << ','
           << format_number(a.threshold) << '\n';
}

}  // namespace khypo
