#include "khypo/cli.hpp"

#include "khypo/common.hpp"
#include "khypo/config.hpp"
#include "khypo/suites.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace khypo {

int cli_main(int argc, char** argv) { return cli_main(argc, argv, std::cout, std::cerr); }

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"kinetic-hypo " + version_string() +
                 ": numerical checks for hypoelliptic regularity of kinetic stable equations"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config, out_dir, format = "csv";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    double quad_scale = 1.0;
    app.add_option("--config", config, "JSON configuration file")->required();
    auto* out_opt = app.add_option("--out", out_dir, "output directory (default: config 'output.dir' or '.')");
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
    app.add_option("--quad-scale", quad_scale, "multiplies every field-quadrature refinement")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
    app.set_version_flag("--version", version_string());

    static const std::map<std::string, std::string> help{
        {"verify-l2", "L2 regularity ratios, lambda sweep, refinement and Bouchut slack"},
        {"verify-lp", "L^p ratios on the physical grid with Plancherel cross-check"},
        {"mc-validate", "Monte Carlo characteristic function, moment scaling and scaling law"},
        {"boltzmann-check", "Carleman vs spherical collision operator, Q1+Q2 split, co-area identity"},
        {"geometry-check", "engulfing, metric-ball sandwich, ball volume, sharp vs maximal function"},
        {"sweep", "L2 pipeline over the alphas listed in 'sweep.alphas'"},
        {"symbol", "Levy symbol table and homogeneity check"}};
    for (const auto& name : suite_names()) app.add_subcommand(name, help.at(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        ExperimentConfig cfg = load_config(config);
        if (*seed_opt) cfg.seed = seed;
        if (*out_opt) cfg.out_dir = out_dir;
        cfg.grid.refine *= quad_scale;
        set_thread_count(threads);
        const RunReport rep = run_suite(cmd, cfg);
        emit_report(rep, cfg.out_dir, format == "json" ? Format::Json : Format::Csv);
        std::size_t failed = 0;
        for (const auto& a : rep.assertions) {
            out << summary_line(a) << '\n';
            failed += a.pass ? 0 : 1;
        }
        for (const auto& n : rep.notes) out << "INFO " << n << '\n';
        out << "SUMMARY " << cmd << " passed=" << rep.assertions.size() - failed << " failed=" << failed << '\n';
        return failed == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << cmd << ": " << e.what() << '\n';
        return 3;
    }
}

}  // namespace khypo
