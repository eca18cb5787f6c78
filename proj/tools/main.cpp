// SPDX-License-Identifier: MIT
//
// windrmt: winding numbers of determinantal curves for additive two-matrix
// models.  All computation is configured through a JSON file; see the
// configs/ directory for worked examples of every command.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "windrmt/cli.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/version.hpp"

namespace {

void report_error(const char* kind, const std::exception& e) {
    std::cerr << "{\"error\": \"" << kind << "\", \"message\": \"" << e.what() << "\"}\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"winding numbers of determinantal curves for additive two-matrix models"};
    app.set_version_flag("--version", std::string("windrmt ") + windrmt::kVersion);

    std::string config_path;
    std::string output_override;
    int threads = 1;
    app.add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    app.add_option("--output", output_override, "override the configured output path");
    app.add_option("--threads", threads,
                   "worker threads for Monte Carlo (affects speed only, never results)");

    std::string result_path;
    std::string script_path = "plot.py";
    CLI::App* plot = app.add_subcommand(
        "plot-script", "generate a plotting script from a saved CSV result");
    plot->add_option("result", result_path, "CSV result file")
        ->required()
        ->check(CLI::ExistingFile);
    plot->add_option("--output", script_path, "script path to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (plot->parsed()) {
            windrmt::emit_plot_script(result_path, script_path);
            std::cout << "plot-script: wrote " << script_path << "\n";
            return 0;
        }
        if (config_path.empty()) {
            std::cerr << "{\"error\": \"config\", \"message\": \"--config is required\"}\n";
            return 2;
        }
        windrmt::RunConfig cfg = windrmt::load_run_config(config_path);
        return windrmt::run_command(std::move(cfg), threads, output_override);
    } catch (const windrmt::ConfigError& e) {
        report_error("config", e);
        return 2;
    } catch (const windrmt::ValidationError& e) {
        report_error("validation", e);
        return 3;
    } catch (const windrmt::NumericalError& e) {
        report_error("numerical", e);
        return 4;
    } catch (const std::exception& e) {
        report_error("internal", e);
        return 1;
    }
}
