// permlim: command-line driver for the permanent-limit laboratory.
//
//   permlim <validate-cost|solve-bridge|converge|balance-study> --config <path> [--workers N]
//
// Exit codes: 0 ok, 1 config error, 2 validation fail, 3 bridge fail, 4 balance fail,
// 5 spectral hypothesis fail.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "permlim/lab.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Exact permanents, balancing and Fredholm limits for entropic transport kernels"};
    app.require_subcommand(1, 1);

    std::string config;
    std::optional<unsigned> workers;
    const std::pair<const char*, const char*> commands[] = {
        {"validate-cost", "Check a cost function on a grid"},
        {"solve-bridge", "Solve for the Schrodinger potential and write it as CSV"},
        {"converge", "Exact D_n, balanced D_n, McCullagh and Fredholm values over n_list"},
        {"balance-study", "Balancing diagnostics and their scaled rates over n_list"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config,-c", config, "INI configuration file")->required();
        sub->add_option("--workers,-j", workers, "Worker threads (overrides [study] workers)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    return permlim::dispatch(sub, config, std::cout, std::cerr, workers);
}
