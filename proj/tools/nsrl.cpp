#include "nsrl/commands.hpp"
#include "nsrl/io.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace nsrl;

int main(int argc, char** argv)
{
    CLI::App app{"Navier-Stokes regularity diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::tool_version);

    std::string config, manifest, out_dir, report_path;

    auto* sim = app.add_subcommand("simulate", "run the periodic-box solver and write a snapshot series");
    sim->add_option("config", config, "key = value solver config")->required();
    sim->add_option("-o,--out", out_dir, "output directory")->required();

    auto* syn = app.add_subcommand("synthesize", "write a self-similar synthetic profile series");
    syn->add_option("config", config, "key = value profile config")->required();
    syn->add_option("-o,--out", out_dir, "output directory")->required();

    auto* diag = app.add_subcommand("diagnose", "run the diagnostics pipeline on a series");
    diag->add_option("manifest", manifest)->required();
    diag->add_option("config", config, "key = value diagnostics config")->required();
    diag->add_option("-r,--report", report_path, "JSON report path")->required();

    auto* split = app.add_subcommand("split-pressure", "pressure split summaries, appended to a report");
    split->add_option("manifest", manifest)->required();
    split->add_option("config", config)->required();
    split->add_option("-r,--report", report_path)->required();

    auto* zm = app.add_subcommand("zoom", "rescale a series around the origin");
    zm->add_option("manifest", manifest)->required();
    zm->add_option("config", config)->required();
    zm->add_option("-o,--out", out_dir, "output directory for the zoomed series");
    zm->add_option("-r,--report", report_path, "append the rescale section to this report");

    auto* rep = app.add_subcommand("report", "validate a report and print its summary line");
    rep->add_option("report", report_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            std::cout << cli::simulate(config, out_dir).string() << "\n";
        } else if (syn->parsed()) {
            std::cout << cli::synthesize(config, out_dir).string() << "\n";
        } else if (diag->parsed()) {
            const auto report = cli::diagnose(manifest, config);
            cli::write_report(report_path, report);
            std::cout << cli::summary_line(report) << "\n";
        } else if (split->parsed()) {
            cli::append_to_report(report_path, "pressure_split", cli::split_pressure(manifest, config), manifest);
        } else if (zm->parsed()) {
            const auto outcome = cli::zoom(manifest, config, out_dir.empty() ? fs::path("zoomed") : fs::path(out_dir));
            if (outcome.manifest) std::cout << outcome.manifest->string() << "\n";
            if (!report_path.empty()) cli::append_to_report(report_path, "rescale", outcome.rescale, manifest);
        } else if (rep->parsed()) {
            const auto report = cli::Json::parse(io::read_file(report_path));
            cli::validate_report(report);
            std::cout << cli::summary_line(report) << "\n";
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "nsrl: error: malformed JSON: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "nsrl: error: " << e.what() << "\n";
        return io::exit_code(e);
    }
    return 0;
}
