#pragma once

#include <json.hpp>

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace khypo {

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// Numeric table; every reported assertion can be recomputed from these columns.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    void add(std::vector<double> row);
};

struct Plot {
    std::string file, table, x;
    std::vector<std::string> ys;
};

struct RunReport {
    std::string command;
    std::vector<Assertion> assertions;
    std::vector<Table> tables;
    std::vector<Plot> plots;                                  // CSV mode only
    std::vector<std::pair<std::string, std::string>> blobs;  // extra files: name, bytes
    std::vector<std::string> notes;                           // informational lines (not assertions)
    const Table& table(const std::string& name) const;
    bool all_pass() const;
    void check(std::string name, bool pass, double value, double threshold, std::string detail = {});
};

enum class Format { Csv, Json };

// First line `# kinetic-hypo v<version> schema=1`; values printed with %.17g.
void write_csv(const Table& t, std::ostream& os);
nlohmann::json report_json(const RunReport& r);
// Line plot of the given columns against `x_column` on a log10 x axis.
void write_svg(const Table& t, const std::string& x_column, const std::vector<std::string>& y_columns,
               std::ostream& os);
// Writes <out>/<table>.csv, plots and assertions.csv (or one <out>/<command>.json) plus blobs; creates `out`.
void emit_report(const RunReport& r, const std::string& out_dir, Format fmt);
std::string format_number(double v);
std::string summary_line(const Assertion& a);

}  // namespace khypo
