#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "memaug/harness/commands.hpp"

#ifndef MEMLAB_CONFIG_DIR
#define MEMLAB_CONFIG_DIR "configs"
#endif

namespace h = memaug::harness;

int main(int argc, char** argv) {
    CLI::App app{"memlab: memory-augmented POMDP experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    h::CommandOptions options;
    std::string out;
    bool quiet = false;
    app.add_option("--jobs,-j", options.jobs, "Parallel runs")->check(CLI::PositiveNumber);
    app.add_option("--out,-o", out, "Output directory (overrides $MEMLAB_OUT)");
    app.add_option("--seed-offset", options.seed_offset, "Added to every configured seed");
    app.add_flag("--quiet,-q", quiet, "No progress output");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Train learners over seeds and write run and summary CSVs");
    run->add_option("config", config_path, "Experiment JSON")->required();
    auto* exact = app.add_subcommand("exact", "Run an exact analysis and write JSON/CSV");
    exact->add_option("config", config_path, "Experiment JSON")->required();

    std::string figure;
    std::string config_dir;
    auto* reproduce = app.add_subcommand("reproduce", "Run a bundled figure config and write plot-ready CSVs");
    reproduce->add_option("figure", figure, "fig2, fig3, fig4, fig6 or fig9")->required();
    reproduce->add_option("--config-dir", config_dir, "Directory holding the bundled figure configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? h::kExitSuccess : h::kExitConfig;
    }
    if (!out.empty()) options.out = out;
    if (!quiet) options.log = &std::cerr;
    if (config_dir.empty()) {
        const char* env = std::getenv("MEMLAB_CONFIG_DIR");
        config_dir = env && *env ? env : MEMLAB_CONFIG_DIR;
    }

    try {
        if (run->parsed()) {
            const auto result = h::cmd_run(config_path, options);
            std::cout << result.directory.string() << "\n";
        } else if (exact->parsed()) {
            const auto result = h::cmd_exact(config_path, options);
            std::cout << result.directory.string() << "\n";
        } else {
            const auto result = h::reproduce_figure(figure, config_dir, options);
            for (const auto& plot : result.plots) std::cout << plot.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return h::exit_code_for(std::current_exception());
    }
    return h::kExitSuccess;
}
