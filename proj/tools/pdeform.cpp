// pdeform: batch driver for scenario files.
//
//   pdeform <command> <scenario-file> [--window D] [--order MU] [--seed N] [--json]
//
// Reports go to stdout; diagnostics to stderr. Exit 0 on success, 2 when a
// hypothesis check fails or an obstruction is nonzero, 1 on any other error.

#include "CLI11.hpp"
#include "pdeform/scenario.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Exact deformation computations for Poisson maps"};
    std::string command, file;
    pdeform::RunOptions opt;
    app.add_option("command", command,
                   "validate | cohomology | pd | pd1 | audit-exactness | first-order | "
                   "obstruct | lift | stability | costability | factor | normal-compare")
        ->required();
    app.add_option("scenario", file, "scenario file")->required();
    app.add_option("--window", opt.window, "cochain window override (default: scenario)");
    app.add_option("--order", opt.order, "lift to k[params]/(m^order) instead of the lift ring");
    app.add_option("--seed", opt.seed, "lift-choice seed");
    app.add_flag("--json", opt.json, "machine-readable output");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(file);
        if (!in) {
            std::cerr << "pdeform: cannot open '" << file << "'\n";
            return 1;
        }
        std::ostringstream text;
        text << in.rdbuf();
        pdeform::Scenario sc = pdeform::parse_scenario(text.str());
        pdeform::RunResult res = pdeform::run_command(command, sc, opt);
        std::cout << res.output;
        return res.exit_code;
    } catch (const pdeform::Error& e) {
        std::cerr << "pdeform: " << e.what() << "\n";
        return e.code() == pdeform::Errc::HypothesisFailed ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "pdeform: " << e.what() << "\n";
        return 1;
    }
}
